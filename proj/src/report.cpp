#include "defsim/report.hpp"

#include <cstdio>
#include <ostream>

#include "defsim/error.hpp"

namespace defsim {

std::string format_score(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

nlohmann::ordered_json report_to_json(const ConsensusReport& report) {
  nlohmann::ordered_json doc;
  doc["model_id"] = report.model_id;
  doc["reference_corpus"] = report.reference_corpus;
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"candidate_id", r.candidate_id},
                    {"average_score", r.average_score},
                    {"rank", r.rank},
                    {"n_references_used", r.n_references_used},
                    {"excluded_self", r.excluded_self}});
  }
  return doc;
}

ConsensusReport report_from_json(const nlohmann::json& doc) {
  try {
    ConsensusReport report;
    report.model_id = doc.at("model_id").get<std::string>();
    report.reference_corpus = doc.at("reference_corpus").get<std::string>();
    for (const auto& r : doc.at("rows")) {
      report.rows.push_back({r.at("candidate_id").get<std::string>(),
                             r.at("average_score").get<double>(), r.at("rank").get<std::size_t>(),
                             r.at("n_references_used").get<std::size_t>(),
                             r.at("excluded_self").get<bool>()});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
}

void write_report_markdown(std::ostream& out, const ConsensusReport& report) {
  out << "Model: `" << report.model_id << "`";
  if (!report.reference_corpus.empty()) out << ", references: `" << report.reference_corpus << "`";
  out << "\n\n";
  out << "| Rank | Definition | Average cosine similarity | References used |\n";
  out << "|---:|---|---:|---:|\n";
  for (const auto& r : report.rows) {
    out << "| " << r.rank << " | " << r.candidate_id << " | " << format_score(r.average_score)
        << " | " << r.n_references_used << (r.excluded_self ? " (self excluded)" : "") << " |\n";
  }
}

void write_pairwise_markdown(std::ostream& out, const SimilarityMatrix& table) {
  out << "| Definition |";
  for (const auto& id : table.reference_ids()) out << ' ' << id << " |";
  out << "\n|---|";
  for (std::size_t j = 0; j < table.cols(); ++j) out << "---:|";
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << "| " << table.candidate_ids()[i] << " |";
    for (double v : table.row(i)) out << ' ' << format_score(v) << " |";
    out << '\n';
  }
}

nlohmann::ordered_json evaluation_to_json(std::span<const EvaluationResult> results) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json anchors = nlohmann::ordered_json::object();
    for (const auto& [id, score] : r.vs_anchors) anchors[id] = score;
    arr.push_back({{"candidate_id", r.candidate_id},
                   {"vs_corpus_average", r.vs_corpus_average},
                   {"n_references_used", r.n_references_used},
                   {"vs_anchors", std::move(anchors)},
                   {"verdict_threshold", r.verdict_threshold},
                   {"admitted", r.admitted}});
  }
  return arr;
}

void write_evaluation_markdown(std::ostream& out, std::span<const EvaluationResult> results) {
  out << "| Definition | Average cosine similarity |";
  std::size_t n_anchors = 0;
  if (!results.empty()) {
    n_anchors = results.front().vs_anchors.size();
    for (const auto& [id, score] : results.front().vs_anchors) out << " vs " << id << " |";
  }
  out << " Admitted |\n|---|---:|";
  for (std::size_t k = 0; k < n_anchors; ++k) out << "---:|";
  out << "---|\n";
  for (const auto& r : results) {
    out << "| " << r.candidate_id << " | " << format_score(r.vs_corpus_average) << " |";
    for (const auto& [id, score] : r.vs_anchors) out << ' ' << format_score(score) << " |";
    out << ' ' << (r.admitted ? "yes" : "no") << " (threshold " << format_score(r.verdict_threshold)
        << ") |\n";
  }
}

}  // namespace defsim
