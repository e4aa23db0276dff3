#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "defsim/corpus.hpp"

namespace defsim {

// A finite real vector with its Euclidean norm computed once at construction.
// Zero vectors are representable; providers reject them before they reach a
// cosine computation.
class EmbeddingVector {
 public:
  // Throws DimensionMismatch for an empty vector and InvalidArgument for a
  // non-finite component.
  EmbeddingVector(std::vector<double> values, std::string model_id);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  double norm() const noexcept { return norm_; }
  const std::string& model_id() const noexcept { return model_id_; }

  bool operator==(const EmbeddingVector& other) const {
    return values_ == other.values_ && model_id_ == other.model_id_;
  }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
  std::string model_id_;
};

// sqrt of the ascending-index sum of squares.
double euclidean_norm(std::span<const double> values);

// Id-keyed vectors sharing one model and one dimension. Insertion order is
// kept and is the order used when the set is serialized or turned into
// matrix rows/columns.
class EmbeddingSet {
 public:
  EmbeddingSet(std::string model_id, std::size_t dim);

  const std::string& model_id() const noexcept { return model_id_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::span<const std::string> ids() const noexcept { return ids_; }

  // Throws DimensionMismatch, ModelMismatch, or DuplicateId.
  void insert(std::string id, EmbeddingVector vector);
  bool contains(std::string_view id) const;
  // Throws MissingVector.
  const EmbeddingVector& at(std::string_view id) const;

  // Throws UnknownId.
  EmbeddingSet subset(std::span<const std::string> ids) const;

  bool operator==(const EmbeddingSet& other) const;

 private:
  std::string model_id_;
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class ProviderKind { kLocalDeterministic, kFile, kRemote };

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);

inline constexpr std::size_t kDefaultLocalDim = 256;
inline constexpr std::string_view kReferenceModelId = "all-mpnet-base-v2";

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kLocalDeterministic;
  std::string endpoint;          // remote
  std::filesystem::path path;    // file
  // Empty means: "fnv1a-bow-<dim>" for local, the file's own id for file.
  std::string model_id;
  std::size_t dim = kDefaultLocalDim;  // local only
  std::size_t batch_size = 32;
  std::size_t max_retries = 3;
  std::chrono::milliseconds timeout{30'000};
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds backoff_base{250};

  // Throws InvalidArgument when a kind-specific field is missing.
  void validate() const;
  std::string effective_model_id() const;
};

/// Hashed bag-of-words: ASCII-lowercased alphanumeric runs, FNV-1a 64 bucketed
/// modulo `dim`, counts L2-normalized. Throws ZeroVector for token-free text.
EmbeddingVector local_deterministic_embed(std::string_view text, std::size_t dim,
                                          std::string model_id = {});

std::string local_model_id(std::size_t dim);

// Keyed by (model id, definition id, text content hash) so an edited text
// never reuses a stale vector.
class EmbeddingCache {
 public:
  std::optional<EmbeddingVector> find(const std::string& model_id, const Definition& def) const;
  void store(const std::string& model_id, const Definition& def, const EmbeddingVector& vector);
  std::size_t size() const noexcept { return entries_.size(); }

  void save(std::ostream& out) const;
  static EmbeddingCache load(std::istream& in);

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<double>> entries_;
};

// Embeds every definition; the returned set follows corpus order.
// Errors: ProviderUnavailable, DimensionMismatch, MissingVector, ZeroVector.
EmbeddingSet embed_corpus(const Corpus& corpus, const ProviderConfig& config,
                          EmbeddingCache* cache = nullptr);

// Embedding file: {"model_id": s, "dim": n, "vectors": {id: [x, ...], ...}}.
EmbeddingSet load_embeddings(std::istream& input);
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(std::ostream& out, const EmbeddingSet& set);
void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);

// Client for the remote embedding service: POST {endpoint}/embed with
// {"model_id", "texts"} and a {"dim", "embeddings"} reply aligned with texts.
class RemoteEmbedder {
 public:
  explicit RemoteEmbedder(ProviderConfig config);

  // One request (with retries). Throws ProviderUnavailable.
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const;

  // Splits into batch_size chunks, runs up to max_in_flight at once and
  // reassembles in input order.
  std::vector<std::vector<double>> embed_all(const std::vector<std::string>& texts) const;

 private:
  ProviderConfig config_;
  std::string token_;
};

}  // namespace defsim
