#include "defsim/similarity.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <thread>

#include "defsim/error.hpp"

namespace defsim {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of dim " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  if (a.norm() == 0.0 || b.norm() == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine is undefined for a zero vector");
  }
  const auto av = a.values();
  const auto bv = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) dot += av[i] * bv[i];
  return std::clamp(dot / (a.norm() * b.norm()), -1.0, 1.0);
}

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> candidate_ids,
                                   std::vector<std::string> reference_ids,
                                   std::vector<double> scores, std::string model_id)
    : candidate_ids_(std::move(candidate_ids)),
      reference_ids_(std::move(reference_ids)),
      scores_(std::move(scores)),
      model_id_(std::move(model_id)) {
  if (scores_.size() != candidate_ids_.size() * reference_ids_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "score count does not match row x column ids");
  }
}

std::size_t SimilarityMatrix::candidate_index(std::string_view id) const {
  auto it = std::find(candidate_ids_.begin(), candidate_ids_.end(), id);
  if (it == candidate_ids_.end()) {
    throw Error(ErrorCode::kUnknownCandidate, "'" + std::string(id) + "' is not a matrix row");
  }
  return static_cast<std::size_t>(it - candidate_ids_.begin());
}

std::size_t SimilarityMatrix::reference_index(std::string_view id) const {
  auto it = std::find(reference_ids_.begin(), reference_ids_.end(), id);
  if (it == reference_ids_.end()) {
    throw Error(ErrorCode::kUnknownId, "'" + std::string(id) + "' is not a matrix column");
  }
  return static_cast<std::size_t>(it - reference_ids_.begin());
}

SimilarityMatrix similarity_matrix(const EmbeddingSet& candidates, const EmbeddingSet& references,
                                   const MatrixOptions& options) {
  if (candidates.empty() || references.empty()) {
    throw Error(ErrorCode::kEmptySet, "similarity matrix needs non-empty candidate and reference sets");
  }
  if (candidates.model_id() != references.model_id()) {
    throw Error(ErrorCode::kModelMismatch, "candidates from '" + candidates.model_id() +
                                               "', references from '" + references.model_id() +
                                               "'");
  }
  if (candidates.dim() != references.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "candidate dim " +
                                                   std::to_string(candidates.dim()) +
                                                   " vs reference dim " +
                                                   std::to_string(references.dim()));
  }

  const std::size_t n_rows = candidates.size();
  const std::size_t n_cols = references.size();
  std::vector<const EmbeddingVector*> refs;
  refs.reserve(n_cols);
  for (const auto& id : references.ids()) refs.push_back(&references.at(id));

  std::vector<double> scores(n_rows * n_cols);
  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& cand = candidates.at(candidates.ids()[i]);
      for (std::size_t j = 0; j < n_cols; ++j) scores[i * n_cols + j] = cosine(cand, *refs[j]);
    }
  };

  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::clamp<std::size_t>(threads, 1, n_rows);
  if (threads == 1) {
    fill_rows(0, n_rows);
  } else {
    // Rows are independent and each cell is written by exactly one thread.
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (n_rows + threads - 1) / threads;
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n_rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, t, begin, end] {
          try {
            fill_rows(begin, end);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<std::string> row_ids(candidates.ids().begin(), candidates.ids().end());
  std::vector<std::string> col_ids(references.ids().begin(), references.ids().end());
  return SimilarityMatrix(std::move(row_ids), std::move(col_ids), std::move(scores),
                          candidates.model_id());
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void write_matrix_csv(std::ostream& out, const SimilarityMatrix& m) {
  out << "candidate";
  for (const auto& id : m.reference_ids()) out << ',' << csv_field(id);
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << csv_field(m.candidate_ids()[i]);
    for (double v : m.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

nlohmann::ordered_json matrix_to_json(const SimilarityMatrix& m) {
  nlohmann::ordered_json doc;
  doc["model_id"] = m.model_id();
  doc["candidate_ids"] = std::vector<std::string>(m.candidate_ids().begin(), m.candidate_ids().end());
  doc["reference_ids"] = std::vector<std::string>(m.reference_ids().begin(), m.reference_ids().end());
  auto& rows = doc["scores"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return doc;
}

SimilarityMatrix matrix_from_json(const nlohmann::json& doc) {
  try {
    auto cand = doc.at("candidate_ids").get<std::vector<std::string>>();
    auto refs = doc.at("reference_ids").get<std::vector<std::string>>();
    std::vector<double> scores;
    for (const auto& row : doc.at("scores")) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != refs.size()) throw Error(ErrorCode::kMalformedFile, "ragged score row");
      scores.insert(scores.end(), r.begin(), r.end());
    }
    return SimilarityMatrix(std::move(cand), std::move(refs), std::move(scores),
                            doc.at("model_id").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

}  // namespace defsim
