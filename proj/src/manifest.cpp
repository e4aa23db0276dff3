#include "defsim/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "defsim/corpus.hpp"
#include "defsim/error.hpp"
#include "defsim/hashing.hpp"

namespace defsim {
namespace fs = std::filesystem;

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["config"] = config;
  doc["input_hashes"] = input_hashes;
  doc["outputs"] = outputs;
  doc["started"] = started;
  doc["finished"] = finished;
  return doc;
}

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  try {
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.config = doc.at("config");
    m.input_hashes = doc.at("input_hashes").get<std::map<std::string, std::string>>();
    m.outputs = doc.at("outputs").get<std::vector<std::string>>();
    m.started = doc.at("started").get<std::string>();
    m.finished = doc.at("finished").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("manifest: ") + e.what());
  }
}

std::string file_content_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return content_hash(buf.str());
}

RunDirectory::RunDirectory(const fs::path& root, const fs::path& explicit_dir,
                           const std::string& hash) {
  if (!explicit_dir.empty()) {
    final_ = explicit_dir;
    if (fs::exists(final_) && !fs::is_empty(final_)) {
      throw Error(ErrorCode::kIo, "run directory " + final_.string() + " exists and is not empty");
    }
  } else {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm);
    const std::string base = std::string(stamp) + "-" + hash.substr(0, 8);
    final_ = root / base;
    for (int k = 2; fs::exists(final_); ++k) final_ = root / (base + "-" + std::to_string(k));
  }
  const fs::path parent = final_.has_parent_path() ? final_.parent_path() : fs::path(".");
  fs::create_directories(parent);
  staging_ = parent / ("." + final_.filename().string() + ".partial");
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

RunDirectory::~RunDirectory() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

fs::path RunDirectory::output(const std::string& name) {
  outputs_.push_back(name);
  return staging_ / name;
}

fs::path RunDirectory::commit(RunManifest manifest) {
  manifest.outputs = outputs_;
  manifest.outputs.push_back("manifest.json");
  manifest.finished = utc_timestamp();
  {
    std::ofstream out(staging_ / "manifest.json", std::ios::binary);
    out << manifest.to_json().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write manifest");
  }
  for (const auto& name : manifest.outputs) {
    if (!fs::exists(staging_ / name)) {
      throw Error(ErrorCode::kIo, "declared output " + name + " was not written");
    }
  }
  if (fs::exists(final_)) fs::remove(final_);  // explicit dir, verified empty
  fs::rename(staging_, final_);
  committed_ = true;
  return final_;
}

}  // namespace defsim
