#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace defsim {

struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;                   // argv plus resolved options
  std::map<std::string, std::string> input_hashes;  // path -> FNV-1a 64 of the bytes
  std::vector<std::string> outputs;                 // file names relative to the run dir
  std::string started;
  std::string finished;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
};

std::string file_content_hash(const std::filesystem::path& path);

// Outputs are written into a hidden staging directory and renamed into place
// by commit(); a run that throws leaves nothing behind.
class RunDirectory {
 public:
  // `explicit_dir` wins when non-empty; otherwise the directory is
  // <root>/<YYYYMMDDTHHMMSSZ>-<hash8>, suffixed if that name is taken.
  RunDirectory(const std::filesystem::path& root, const std::filesystem::path& explicit_dir,
               const std::string& content_hash);
  ~RunDirectory();
  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;

  // Path for a new output inside the staging area; recorded in the manifest.
  std::filesystem::path output(const std::string& name);

  // Writes manifest.json, checks that every listed output exists, renames.
  std::filesystem::path commit(RunManifest manifest);

  const std::filesystem::path& final_path() const noexcept { return final_; }

 private:
  std::filesystem::path final_;
  std::filesystem::path staging_;
  std::vector<std::string> outputs_;
  bool committed_ = false;
};

}  // namespace defsim
