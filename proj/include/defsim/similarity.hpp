#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "defsim/embedding.hpp"

namespace defsim {

/// Cosine similarity: ascending-index dot product in double precision over
/// the product of cached norms, clamped to [-1, 1].
/// Throws DimensionMismatch or ZeroVector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Dense row-major candidate x reference score table.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::vector<std::string> candidate_ids, std::vector<std::string> reference_ids,
                   std::vector<double> scores, std::string model_id);

  std::size_t rows() const noexcept { return candidate_ids_.size(); }
  std::size_t cols() const noexcept { return reference_ids_.size(); }
  std::span<const std::string> candidate_ids() const noexcept { return candidate_ids_; }
  std::span<const std::string> reference_ids() const noexcept { return reference_ids_; }
  const std::string& model_id() const noexcept { return model_id_; }

  double at(std::size_t row, std::size_t col) const { return scores_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(scores_).subspan(r * cols(), cols());
  }
  std::span<const double> scores() const noexcept { return scores_; }

  // Throws UnknownCandidate / UnknownId.
  std::size_t candidate_index(std::string_view id) const;
  std::size_t reference_index(std::string_view id) const;

  bool operator==(const SimilarityMatrix&) const = default;

 private:
  std::vector<std::string> candidate_ids_;
  std::vector<std::string> reference_ids_;
  std::vector<double> scores_;
  std::string model_id_;
};

struct MatrixOptions {
  // 0 picks hardware_concurrency; 1 is serial. Output is identical either way.
  std::size_t threads = 0;
};

// scores[i][j] = cosine(candidates[i], references[j]) in set order.
// Throws EmptySet, DimensionMismatch, ModelMismatch, ZeroVector.
SimilarityMatrix similarity_matrix(const EmbeddingSet& candidates, const EmbeddingSet& references,
                                   const MatrixOptions& options = {});

// Header row of reference ids, first column candidate ids, 6 decimals.
void write_matrix_csv(std::ostream& out, const SimilarityMatrix& m);
nlohmann::ordered_json matrix_to_json(const SimilarityMatrix& m);
SimilarityMatrix matrix_from_json(const nlohmann::json& doc);

}  // namespace defsim
