#include "defsim/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "defsim/error.hpp"

namespace defsim {

void SelfAliases::add(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  pairs_.emplace(std::move(a), std::move(b));
}

bool SelfAliases::same(std::string_view a, std::string_view b) const {
  if (a == b) return true;
  if (b < a) std::swap(a, b);
  return pairs_.contains(std::pair<std::string, std::string>(a, b));
}

std::vector<std::pair<std::string, std::string>> SelfAliases::pairs() const {
  return {pairs_.begin(), pairs_.end()};
}

SelfAliases SelfAliases::defaults() {
  SelfAliases aliases;
  aliases.add("base-0.1", "ind-58");
  return aliases;
}

AverageScore average_similarity(std::string_view candidate_id, const SimilarityMatrix& m,
                                const SelfExclusion& exclusion) {
  const auto row = m.row(m.candidate_index(candidate_id));
  const auto refs = m.reference_ids();
  AverageScore out;
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (exclusion.enabled && exclusion.aliases.same(candidate_id, refs[j])) {
      out.excluded_self = true;
      continue;
    }
    sum += row[j];
    ++out.n_used;
  }
  if (out.n_used == 0) {
    throw Error(ErrorCode::kEmptyReferenceSet,
                "no reference columns left for '" + std::string(candidate_id) + "'");
  }
  out.average = sum / static_cast<double>(out.n_used);
  return out;
}

const ConsensusRow& ConsensusReport::row_for(std::string_view candidate_id) const {
  for (const auto& row : rows) {
    if (row.candidate_id == candidate_id) return row;
  }
  throw Error(ErrorCode::kUnknownCandidate, "'" + std::string(candidate_id) + "' not in report");
}

ConsensusReport rank(const SimilarityMatrix& m, const SelfExclusion& exclusion,
                     std::string reference_corpus) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kEmptySet, "cannot rank an empty matrix");
  }
  ConsensusReport report{m.model_id(), std::move(reference_corpus), {}};
  report.rows.reserve(m.rows());
  for (const auto& id : m.candidate_ids()) {
    const auto avg = average_similarity(id, m, exclusion);
    report.rows.push_back({id, avg.average, 0, avg.n_used, avg.excluded_self});
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.average_score != b.average_score) return a.average_score > b.average_score;
    return a.candidate_id < b.candidate_id;
  });
  for (std::size_t i = 0; i < report.rows.size(); ++i) report.rows[i].rank = i + 1;
  return report;
}

SimilarityMatrix pairwise_table(std::span<const std::string> ids, const EmbeddingSet& set) {
  if (ids.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "pairwise table needs at least two ids");
  }
  const auto picked = set.subset(ids);
  return similarity_matrix(picked, picked, MatrixOptions{1});
}

EvaluationResult evaluate_new(const Definition& candidate, const EvaluationRequest& request,
                              const ProviderConfig& config, EmbeddingCache* cache) {
  if (request.corpus == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation needs a reference corpus");
  }
  if (!std::isfinite(request.threshold)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be finite");
  }
  const Corpus& corpus = *request.corpus;

  std::vector<Definition> anchor_defs;
  for (const auto& id : request.anchors) {
    const Definition* def = corpus.find(id);
    if (def == nullptr && request.anchor_pool != nullptr) def = request.anchor_pool->find(id);
    if (def == nullptr) throw Error(ErrorCode::kUnknownId, "unknown anchor '" + id + "'");
    if (std::none_of(anchor_defs.begin(), anchor_defs.end(),
                     [&](const Definition& d) { return d.id == id; })) {
      anchor_defs.push_back(*def);
    }
  }

  const auto candidate_set =
      embed_corpus(Corpus("candidate", {candidate}), config, cache);
  const auto corpus_set = embed_corpus(corpus, config, cache);

  const auto corpus_row = similarity_matrix(candidate_set, corpus_set, MatrixOptions{1});
  const auto avg = average_similarity(candidate.id, corpus_row, request.exclusion);

  EvaluationResult result;
  result.candidate_id = candidate.id;
  result.vs_corpus_average = avg.average;
  result.n_references_used = avg.n_used;
  result.verdict_threshold = request.threshold;
  result.admitted = avg.average >= request.threshold;

  if (!anchor_defs.empty()) {
    const auto anchor_set = embed_corpus(Corpus("anchors", std::move(anchor_defs)), config, cache);
    const auto& cand_vec = candidate_set.at(candidate.id);
    for (const auto& id : request.anchors) {
      result.vs_anchors.emplace_back(id, cosine(cand_vec, anchor_set.at(id)));
    }
  }
  return result;
}

}  // namespace defsim
