#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "defsim/corpus.hpp"
#include "defsim/embedding.hpp"
#include "defsim/similarity.hpp"

namespace defsim {

inline constexpr double kDefaultAdmissionThreshold = 0.80;

// Symmetric "same definition under another id" relation used when dropping a
// candidate's own column. Identity always counts.
class SelfAliases {
 public:
  void add(std::string a, std::string b);
  bool same(std::string_view a, std::string_view b) const;
  std::vector<std::pair<std::string, std::string>> pairs() const;

  // base-0.1 <-> ind-58: the baseline text is also individual definition 58.
  static SelfAliases defaults();

 private:
  std::set<std::pair<std::string, std::string>, std::less<>> pairs_;
};

struct SelfExclusion {
  bool enabled = true;
  SelfAliases aliases = SelfAliases::defaults();
};

struct AverageScore {
  double average = 0.0;
  std::size_t n_used = 0;
  bool excluded_self = false;  // at least one column was dropped
};

// Arithmetic mean of a matrix row in ascending column order.
// Throws UnknownCandidate, EmptyReferenceSet.
AverageScore average_similarity(std::string_view candidate_id, const SimilarityMatrix& m,
                                const SelfExclusion& exclusion = {});

struct ConsensusRow {
  std::string candidate_id;
  double average_score = 0.0;
  std::size_t rank = 0;
  std::size_t n_references_used = 0;
  bool excluded_self = false;

  bool operator==(const ConsensusRow&) const = default;
};

struct ConsensusReport {
  std::string model_id;
  std::string reference_corpus;
  std::vector<ConsensusRow> rows;  // average desc, then candidate id asc; ranks 1..N

  const ConsensusRow& row_for(std::string_view candidate_id) const;
};

// Throws EmptySet for an empty matrix and EmptyReferenceSet when exclusion
// leaves a candidate with no columns.
ConsensusReport rank(const SimilarityMatrix& m, const SelfExclusion& exclusion = {},
                     std::string reference_corpus = {});

// Square table over `ids`. Throws UnknownId; needs at least two ids.
SimilarityMatrix pairwise_table(std::span<const std::string> ids, const EmbeddingSet& set);

struct EvaluationResult {
  std::string candidate_id;
  double vs_corpus_average = 0.0;
  std::size_t n_references_used = 0;
  std::vector<std::pair<std::string, double>> vs_anchors;  // anchor order as requested
  double verdict_threshold = kDefaultAdmissionThreshold;
  bool admitted = false;
};

struct EvaluationRequest {
  const Corpus* corpus = nullptr;         // reference corpus
  const Corpus* anchor_pool = nullptr;    // extra anchor source (e.g. composites); optional
  std::vector<std::string> anchors;       // ids from corpus or anchor_pool
  double threshold = kDefaultAdmissionThreshold;
  SelfExclusion exclusion{};
};

// Scores a new definition against the accumulated corpus and the anchors.
// Propagates embedding errors; throws UnknownId for an unknown anchor.
EvaluationResult evaluate_new(const Definition& candidate, const EvaluationRequest& request,
                              const ProviderConfig& config, EmbeddingCache* cache = nullptr);

}  // namespace defsim
