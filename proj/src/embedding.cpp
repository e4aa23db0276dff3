#include "defsim/embedding.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "defsim/error.hpp"
#include "defsim/hashing.hpp"

namespace defsim {
namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool all_zero(std::span<const double> values) {
  for (double v : values) {
    if (v != 0.0) return false;
  }
  return true;
}

}  // namespace

double euclidean_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector::EmbeddingVector(std::vector<double> values, std::string model_id)
    : values_(std::move(values)), model_id_(std::move(model_id)) {
  if (values_.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding vector must have dim >= 1");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite component at index " + std::to_string(i));
    }
  }
  norm_ = euclidean_norm(values_);
}

EmbeddingSet::EmbeddingSet(std::string model_id, std::size_t dim)
    : model_id_(std::move(model_id)), dim_(dim) {
  if (dim_ == 0) throw Error(ErrorCode::kDimensionMismatch, "embedding set dim must be >= 1");
}

void EmbeddingSet::insert(std::string id, EmbeddingVector vector) {
  if (vector.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "'" + id + "' has dim " +
                                                   std::to_string(vector.dim()) + ", expected " +
                                                   std::to_string(dim_));
  }
  if (vector.model_id() != model_id_) {
    throw Error(ErrorCode::kModelMismatch,
                "'" + id + "' from model '" + vector.model_id() + "', set is '" + model_id_ + "'");
  }
  if (index_.contains(id)) throw Error(ErrorCode::kDuplicateId, "duplicate vector id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  vectors_.push_back(std::move(vector));
}

bool EmbeddingSet::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

const EmbeddingVector& EmbeddingSet::at(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw Error(ErrorCode::kMissingVector, "no vector for '" + std::string(id) + "'");
  }
  return vectors_[it->second];
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::string> ids) const {
  EmbeddingSet out(model_id_, dim_);
  for (const auto& id : ids) {
    if (!contains(id)) throw Error(ErrorCode::kUnknownId, "no vector for '" + id + "'");
    out.insert(id, at(id));
  }
  return out;
}

bool EmbeddingSet::operator==(const EmbeddingSet& other) const {
  return model_id_ == other.model_id_ && dim_ == other.dim_ && ids_ == other.ids_ &&
         vectors_ == other.vectors_;
}

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kLocalDeterministic: return "local";
    case ProviderKind::kFile: return "file";
    case ProviderKind::kRemote: return "remote";
  }
  return "local";
}

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "local" || name == "local_deterministic") return ProviderKind::kLocalDeterministic;
  if (name == "file") return ProviderKind::kFile;
  if (name == "remote") return ProviderKind::kRemote;
  throw Error(ErrorCode::kInvalidArgument, "unknown provider '" + std::string(name) + "'");
}

void ProviderConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (max_in_flight == 0) throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be >= 1");
  switch (kind) {
    case ProviderKind::kLocalDeterministic:
      if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "local provider needs dim >= 1");
      break;
    case ProviderKind::kFile:
      if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "file provider needs a path");
      break;
    case ProviderKind::kRemote:
      if (endpoint.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "remote provider needs an endpoint");
      }
      break;
  }
}

std::string ProviderConfig::effective_model_id() const {
  if (!model_id.empty()) return model_id;
  switch (kind) {
    case ProviderKind::kLocalDeterministic: return local_model_id(dim);
    case ProviderKind::kRemote: return std::string(kReferenceModelId);
    case ProviderKind::kFile: return {};
  }
  return {};
}

std::string local_model_id(std::size_t dim) { return "fnv1a-bow-" + std::to_string(dim); }

EmbeddingVector local_deterministic_embed(std::string_view text, std::size_t dim,
                                          std::string model_id) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  std::vector<double> counts(dim, 0.0);
  std::size_t tokens = 0;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    counts[fnv1a64(token) % dim] += 1.0;
    ++tokens;
    token.clear();
  };
  for (char c : text) {
    if (is_ascii_alnum(static_cast<unsigned char>(c))) {
      token.push_back(ascii_lower(c));
    } else {
      flush();
    }
  }
  flush();
  if (tokens == 0) {
    throw Error(ErrorCode::kZeroVector, "text has no alphanumeric tokens");
  }
  const double norm = euclidean_norm(counts);
  for (double& v : counts) v /= norm;
  return EmbeddingVector(std::move(counts),
                         model_id.empty() ? local_model_id(dim) : std::move(model_id));
}

std::optional<EmbeddingVector> EmbeddingCache::find(const std::string& model_id,
                                                    const Definition& def) const {
  auto it = entries_.find(Key{model_id, def.id, content_hash(def.text)});
  if (it == entries_.end()) return std::nullopt;
  return EmbeddingVector(it->second, model_id);
}

void EmbeddingCache::store(const std::string& model_id, const Definition& def,
                           const EmbeddingVector& vector) {
  entries_[Key{model_id, def.id, content_hash(def.text)}] =
      std::vector<double>(vector.values().begin(), vector.values().end());
}

void EmbeddingCache::save(std::ostream& out) const {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [key, values] : entries_) {
    nlohmann::ordered_json e;
    e["model_id"] = std::get<0>(key);
    e["id"] = std::get<1>(key);
    e["text_hash"] = std::get<2>(key);
    e["values"] = values;
    entries.push_back(std::move(e));
  }
  out << nlohmann::ordered_json{{"entries", std::move(entries)}}.dump() << '\n';
}

EmbeddingCache EmbeddingCache::load(std::istream& in) {
  EmbeddingCache cache;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& e : doc.at("entries")) {
      cache.entries_[Key{e.at("model_id").get<std::string>(), e.at("id").get<std::string>(),
                         e.at("text_hash").get<std::string>()}] =
          e.at("values").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("embedding cache: ") + e.what());
  }
  return cache;
}

EmbeddingSet embed_corpus(const Corpus& corpus, const ProviderConfig& config,
                          EmbeddingCache* cache) {
  config.validate();
  const auto defs = corpus.definitions();

  if (config.kind == ProviderKind::kFile) {
    const EmbeddingSet file = load_embeddings(config.path);
    if (!config.model_id.empty() && config.model_id != file.model_id()) {
      throw Error(ErrorCode::kModelMismatch, "embedding file holds '" + file.model_id() +
                                                 "', requested '" + config.model_id + "'");
    }
    EmbeddingSet out(file.model_id(), file.dim());
    for (const auto& def : defs) {
      const auto& vec = file.at(def.id);
      if (all_zero(vec.values())) {
        throw Error(ErrorCode::kZeroVector, "file vector for '" + def.id + "' is all zeros");
      }
      out.insert(def.id, vec);
    }
    return out;
  }

  const std::string model_id = config.effective_model_id();
  std::vector<std::optional<EmbeddingVector>> vectors(defs.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (cache != nullptr) vectors[i] = cache->find(model_id, defs[i]);
    if (!vectors[i]) missing.push_back(i);
  }

  if (config.kind == ProviderKind::kLocalDeterministic) {
    for (std::size_t i : missing) {
      try {
        vectors[i] = local_deterministic_embed(defs[i].text, config.dim, model_id);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kZeroVector) throw;
        throw Error(ErrorCode::kZeroVector, "'" + defs[i].id + "': " + e.what());
      }
    }
  } else if (!missing.empty()) {
    std::vector<std::string> texts;
    texts.reserve(missing.size());
    for (std::size_t i : missing) texts.push_back(defs[i].text);
    auto raw = RemoteEmbedder(config).embed_all(texts);
    for (std::size_t k = 0; k < missing.size(); ++k) {
      const auto& def = defs[missing[k]];
      if (all_zero(raw[k])) {
        throw Error(ErrorCode::kZeroVector, "remote vector for '" + def.id + "' is all zeros");
      }
      try {
        vectors[missing[k]] = EmbeddingVector(std::move(raw[k]), model_id);
      } catch (const Error& e) {
        throw Error(ErrorCode::kProviderUnavailable, "'" + def.id + "': " + e.what());
      }
    }
  }

  const std::size_t dim = vectors.front()->dim();
  EmbeddingSet out(model_id, dim);
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (vectors[i]->dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "'" + defs[i].id + "' has dim " +
                                                     std::to_string(vectors[i]->dim()) +
                                                     ", first vector has " + std::to_string(dim));
    }
    if (cache != nullptr) cache->store(model_id, defs[i], *vectors[i]);
    out.insert(defs[i].id, std::move(*vectors[i]));
  }
  return out;
}

}  // namespace defsim
