#include "defsim/corpus.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "defsim/error.hpp"
#include "defsim/hashing.hpp"

namespace defsim {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string required_string(const nlohmann::json& record, const char* key,
                            std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) +
                                                 ": missing or non-string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(DefinitionKind kind) {
  switch (kind) {
    case DefinitionKind::kIndividual: return "individual";
    case DefinitionKind::kComposite: return "composite";
    case DefinitionKind::kBaseline: return "baseline";
    case DefinitionKind::kExternal: return "external";
  }
  return "individual";
}

DefinitionKind parse_definition_kind(std::string_view name) {
  if (name == "individual") return DefinitionKind::kIndividual;
  if (name == "composite") return DefinitionKind::kComposite;
  if (name == "baseline") return DefinitionKind::kBaseline;
  if (name == "external") return DefinitionKind::kExternal;
  throw Error(ErrorCode::kMalformedRecord, "unknown definition kind '" + std::string(name) + "'");
}

Corpus::Corpus(std::string name, std::vector<Definition> definitions, std::string created)
    : name_(std::move(name)),
      definitions_(std::move(definitions)),
      created_(created.empty() ? utc_timestamp() : std::move(created)) {
  if (definitions_.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus '" + name_ + "' has no definitions");
  }
  index_.reserve(definitions_.size());
  for (std::size_t i = 0; i < definitions_.size(); ++i) {
    const auto& def = definitions_[i];
    if (def.id.empty()) {
      throw Error(ErrorCode::kMalformedRecord, "record " + std::to_string(i + 1) + ": empty id");
    }
    if (normalize_whitespace(def.text).empty()) {
      throw Error(ErrorCode::kMalformedRecord, "record " + std::to_string(i + 1) + " ('" +
                                                   def.id + "'): empty text");
    }
    if (!index_.emplace(def.id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id '" + def.id + "'");
    }
  }
}

bool Corpus::contains(std::string_view id) const { return find(id) != nullptr; }

const Definition* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &definitions_[it->second];
}

const Definition& Corpus::at(std::string_view id) const {
  const auto* def = find(id);
  if (def == nullptr) {
    throw Error(ErrorCode::kUnknownId, "'" + std::string(id) + "' not in corpus '" + name_ + "'");
  }
  return *def;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(definitions_.size());
  for (const auto& def : definitions_) out.push_back(def.id);
  return out;
}

std::string Corpus::text_hash() const {
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& def : definitions_) {
    h = fnv1a64(def.text, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  }
  return to_hex(h);
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Corpus parse_corpus(std::istream& input, std::string name) {
  std::vector<Definition> definitions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_whitespace(line).empty()) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": expected a JSON object");
    }

    Definition def;
    def.id = required_string(record, "id", line_no);
    def.text = normalize_whitespace(required_string(record, "text", line_no));
    try {
      def.kind = parse_definition_kind(required_string(record, "kind", line_no));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (auto it = record.find("source"); it != record.end()) {
      if (!it->is_string()) {
        throw Error(ErrorCode::kMalformedRecord,
                    "line " + std::to_string(line_no) + ": 'source' must be a string");
      }
      def.source = it->get<std::string>();
    }
    if (def.id.empty()) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) + ": empty id");
    }
    if (def.text.empty()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + " ('" + def.id + "'): empty text");
    }
    definitions.push_back(std::move(def));
  }
  if (input.bad()) throw Error(ErrorCode::kIo, "read failure in corpus '" + name + "'");
  return Corpus(std::move(name), std::move(definitions));
}

Corpus parse_corpus(std::string_view input, std::string name) {
  std::istringstream stream{std::string(input)};
  return parse_corpus(stream, std::move(name));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file " + path.string());
  return parse_corpus(in, path.stem().string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& def : corpus.definitions()) {
    nlohmann::ordered_json record;
    record["id"] = def.id;
    record["text"] = def.text;
    record["kind"] = to_string(def.kind);
    record["source"] = def.source;
    out << record.dump() << '\n';
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_corpus(out, corpus);
}

Corpus subset(const Corpus& corpus, std::span<const std::string> ids) {
  if (ids.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "empty subset of '" + corpus.name() + "'");
  }
  std::vector<Definition> picked;
  picked.reserve(ids.size());
  for (const auto& id : ids) picked.push_back(corpus.at(id));
  return Corpus(corpus.name(), std::move(picked));
}

Corpus merge(std::span<const Corpus> corpora, std::string name) {
  std::vector<Definition> all;
  for (const auto& c : corpora) {
    all.insert(all.end(), c.definitions().begin(), c.definitions().end());
  }
  return Corpus(std::move(name), std::move(all));
}

}  // namespace defsim
