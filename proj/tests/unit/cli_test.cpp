#include "defsim/cli.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "defsim/corpus.hpp"
#include "support/test_util.hpp"

using defsim::testing::data_path;
using defsim::testing::read_file;
using defsim::testing::TempDir;
using defsim::testing::write_file;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = defsim::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return data_path(name).string(); }

std::vector<fs::path> entries(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  return out;
}

}  // namespace

TEST(Cli, IngestCheckReportsCountsAndAlias) {
  const auto r = run({"ingest-check", data("individual-60.jsonl"), data("baseline.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("60 definitions, 60 individual"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("alias base-0.1 = ind-58: texts identical"), std::string::npos) << r.out;
}

TEST(Cli, AnalyzeWritesOutputsAndManifest) {
  TempDir tmp;
  const auto r = run({"analyze", "--candidates", data("composite-20.jsonl"), "--references",
                      data("individual-60.jsonl"), "--run-dir", (tmp / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"matrix.csv", "matrix.json", "report.json", "report.md", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(tmp / "run" / name)) << name;
  }
  const auto manifest = nlohmann::json::parse(read_file(tmp / "run" / "manifest.json"));
  EXPECT_EQ(manifest.at("command"), "analyze");
  EXPECT_EQ(manifest.at("input_hashes").size(), 2u);
  EXPECT_EQ(manifest.at("config").at("provider").at("kind"), "local");
  const auto report = nlohmann::json::parse(read_file(tmp / "run" / "report.json"));
  EXPECT_EQ(report.at("rows").size(), 20u);
  EXPECT_NE(r.out.find("| Rank | Definition |"), std::string::npos);
}

TEST(Cli, AnalyzeIsDeterministic) {
  TempDir tmp;
  for (const char* dir : {"a", "b"}) {
    const auto r = run({"analyze", "--candidates", data("baseline.jsonl"), "--references",
                        data("individual-60.jsonl"), "--threads", "3", "--run-dir",
                        (tmp / dir).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* name : {"matrix.csv", "matrix.json", "report.json", "report.md"}) {
    EXPECT_EQ(read_file(tmp / "a" / name), read_file(tmp / "b" / name)) << name;
  }
}

TEST(Cli, SelfExclusionFlags) {
  TempDir tmp;
  const auto base = {std::string("analyze"), std::string("--candidates"), data("baseline.jsonl"),
                     std::string("--references"), data("individual-60.jsonl")};
  std::vector<std::string> excl(base), incl(base);
  excl.insert(excl.end(), {"--run-dir", (tmp / "x").string()});
  incl.insert(incl.end(), {"--include-self", "--run-dir", (tmp / "i").string()});
  ASSERT_EQ(run(excl).code, 0);
  ASSERT_EQ(run(incl).code, 0);
  const auto rx = nlohmann::json::parse(read_file(tmp / "x" / "report.json"));
  const auto ri = nlohmann::json::parse(read_file(tmp / "i" / "report.json"));
  EXPECT_EQ(rx["rows"][0]["n_references_used"], 59);
  EXPECT_EQ(ri["rows"][0]["n_references_used"], 60);
}

TEST(Cli, MissingReferencesFailsWithoutRunDir) {
  TempDir tmp;
  const auto r = run({"analyze", "--candidates", data("composite-20.jsonl"), "--references",
                      (tmp / "nope.jsonl").string(), "--out", (tmp / "runs").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(entries(tmp / "runs").empty());
}

TEST(Cli, FailedRunLeavesNoDirectory) {
  TempDir tmp;
  write_file(tmp / "bad.jsonl", "{\"id\":\"x\",\"text\":\"???\",\"kind\":\"external\",\"source\":\"\"}\n");
  const auto r = run({"analyze", "--candidates", (tmp / "bad.jsonl").string(), "--references",
                      data("individual-60.jsonl"), "--out", (tmp / "runs").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ZeroVector"), std::string::npos) << r.err;
  EXPECT_TRUE(entries(tmp / "runs").empty());
}

TEST(Cli, CompareNeedsTwoIds) {
  TempDir tmp;
  const auto r = run({"compare", "--ids", "comp-19", "--corpus", data("composite-20.jsonl"),
                      "--out", (tmp / "runs").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(entries(tmp / "runs").empty());
}

TEST(Cli, EmbedThenCompareAndAnalyzeFromFile) {
  TempDir tmp;
  auto r = run({"embed", "--corpus", data("individual-60.jsonl"), "--corpus",
                data("composite-20.jsonl"), "--run-dir", (tmp / "emb").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto file = (tmp / "emb" / "embeddings.json").string();

  r = run({"compare", "--ids", "comp-19,comp-14,comp-12", "--embeddings", file, "--run-dir",
           (tmp / "cmp").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_file(tmp / "cmp" / "pairwise.csv").starts_with("candidate,comp-19,comp-14,comp-12\n"));

  r = run({"analyze", "--candidates", data("composite-20.jsonl"), "--references",
           data("individual-60.jsonl"), "--embeddings", file, "--run-dir", (tmp / "file").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"analyze", "--candidates", data("composite-20.jsonl"), "--references",
           data("individual-60.jsonl"), "--run-dir", (tmp / "local").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(tmp / "file" / "matrix.csv"), read_file(tmp / "local" / "matrix.csv"));

  r = run({"analyze", "--candidates", data("external-candidates.jsonl"), "--references",
           data("individual-60.jsonl"), "--embeddings", file, "--out", (tmp / "runs").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("MissingVector"), std::string::npos) << r.err;
}

TEST(Cli, EvaluateThresholds) {
  TempDir tmp;
  auto r = run({"evaluate", "--candidates", data("external-candidates.jsonl"), "--references",
                data("individual-60.jsonl"), "--anchors", "comp-19,base-0.1", "--anchor-corpus",
                data("composite-20.jsonl"), "--anchor-corpus", data("baseline.jsonl"),
                "--threshold", "-1", "--run-dir", (tmp / "e").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(tmp / "e" / "evaluation.json"));
  ASSERT_EQ(j.size(), 3u);
  for (const auto& row : j) {
    EXPECT_TRUE(row["admitted"].get<bool>());
    EXPECT_EQ(row["vs_anchors"].size(), 2u);
  }
  EXPECT_NE(read_file(tmp / "e" / "evaluation.md").find("| vs comp-19 | vs base-0.1 |"),
            std::string::npos);

  r = run({"evaluate", "--candidates", data("external-candidates.jsonl"), "--references",
           data("individual-60.jsonl"), "--anchors", "comp-99", "--out", (tmp / "runs").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(entries(tmp / "runs").empty());
}

TEST(Cli, GenerateMockIsDeterministic) {
  TempDir tmp;
  for (const char* dir : {"a", "b"}) {
    const auto r = run({"generate", "--mock", "--seed", "5", "-n", "6", "--corpus",
                        data("individual-60.jsonl"), "--run-dir", (tmp / dir).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_file(tmp / "a" / "generated.jsonl"), read_file(tmp / "b" / "generated.jsonl"));
  const auto c = defsim::load_corpus(tmp / "a" / "generated.jsonl");
  EXPECT_EQ(c.size(), 6u);
  EXPECT_TRUE(fs::exists(tmp / "a" / "generated.provenance.jsonl"));
}

TEST(Cli, GenerateArgumentErrors) {
  TempDir tmp;
  EXPECT_EQ(run({"generate", "--mock", "-n", "0", "--corpus", data("individual-60.jsonl"), "--out",
                 (tmp / "runs").string()})
                .code,
            2);
  EXPECT_EQ(run({"generate", "--corpus", data("individual-60.jsonl"), "--out",
                 (tmp / "runs").string()})
                .code,
            2);
  EXPECT_TRUE(entries(tmp / "runs").empty());
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = DEFSIM_CLI_PATH;
  EXPECT_EQ(std::system((bin + " --help > /dev/null").c_str()), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " compare --ids a > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " ingest-check " + data("baseline.jsonl") +
                                     " > /dev/null").c_str())),
            0);
}
