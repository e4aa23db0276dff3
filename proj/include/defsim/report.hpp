#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "defsim/consensus.hpp"
#include "defsim/similarity.hpp"

namespace defsim {

// Display precision for Markdown output. JSON keeps full precision.
inline constexpr int kDisplayDecimals = 3;

std::string format_score(double value, int decimals = kDisplayDecimals);

nlohmann::ordered_json report_to_json(const ConsensusReport& report);
ConsensusReport report_from_json(const nlohmann::json& doc);
// | Rank | Definition | Average cosine similarity | References used |
void write_report_markdown(std::ostream& out, const ConsensusReport& report);

// Square table with ids on both axes, like the top-3 comparison table.
void write_pairwise_markdown(std::ostream& out, const SimilarityMatrix& table);

nlohmann::ordered_json evaluation_to_json(std::span<const EvaluationResult> results);
// | Definition | Average cosine similarity | <anchors...> | Admitted |
void write_evaluation_markdown(std::ostream& out, std::span<const EvaluationResult> results);

}  // namespace defsim
