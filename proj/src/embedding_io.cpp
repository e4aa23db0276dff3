#include <fstream>

#include <nlohmann/json.hpp>

#include "defsim/embedding.hpp"
#include "defsim/error.hpp"

namespace defsim {

EmbeddingSet load_embeddings(std::istream& input) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(input);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
  if (!doc.is_object() || !doc.contains("model_id") || !doc["model_id"].is_string() ||
      !doc.contains("dim") || !doc["dim"].is_number_unsigned() || !doc.contains("vectors") ||
      !doc["vectors"].is_object()) {
    throw Error(ErrorCode::kMalformedFile,
                "expected {\"model_id\": string, \"dim\": positive int, \"vectors\": object}");
  }
  const auto model_id = doc["model_id"].get<std::string>();
  const auto dim = doc["dim"].get<std::size_t>();
  if (dim == 0) throw Error(ErrorCode::kMalformedFile, "dim must be >= 1");

  EmbeddingSet set(model_id, dim);
  for (const auto& [id, values] : doc["vectors"].items()) {
    if (!values.is_array()) {
      throw Error(ErrorCode::kMalformedFile, "vector '" + id + "' is not an array");
    }
    std::vector<double> v;
    v.reserve(values.size());
    for (const auto& x : values) {
      if (!x.is_number()) {
        throw Error(ErrorCode::kMalformedFile, "vector '" + id + "' has a non-numeric entry");
      }
      v.push_back(x.get<double>());
    }
    if (v.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "vector '" + id + "' has " +
                                                     std::to_string(v.size()) +
                                                     " entries, file declares dim " +
                                                     std::to_string(dim));
    }
    try {
      set.insert(id, EmbeddingVector(std::move(v), model_id));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedFile, "vector '" + id + "': " + e.what());
    }
  }
  return set;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open embedding file " + path.string());
  return load_embeddings(in);
}

// nlohmann writes doubles in shortest round-trip form, so load(save(x)) == x.
void save_embeddings(std::ostream& out, const EmbeddingSet& set) {
  nlohmann::ordered_json doc;
  doc["model_id"] = set.model_id();
  doc["dim"] = set.dim();
  auto& vectors = doc["vectors"] = nlohmann::ordered_json::object();
  for (const auto& id : set.ids()) {
    const auto values = set.at(id).values();
    vectors[id] = std::vector<double>(values.begin(), values.end());
  }
  out << doc.dump() << '\n';
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  save_embeddings(out, set);
}

}  // namespace defsim
