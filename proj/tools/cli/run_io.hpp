#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bubbletower/trajectory.hpp"

namespace bubbletower::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kToolVersion = "0.3.0";

// Lower-case hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const fs::path& path);
std::string sha256_text(const std::string& text);

// $BUBBLETOWER_DATA_DIR/<name>, or ./runs/<name> when the variable is unset.
fs::path default_output(const std::string& name);

// Inventory entry {path relative to the run dir, sha256}.
json file_entry(const fs::path& run_dir, const fs::path& file);

void write_json(const fs::path& path, const json& doc);
json read_json(const fs::path& path);

struct LoadedRun {
  json manifest;
  Trajectory trajectory;
};

// Reads manifest.json and every snapshot it lists, in order. T_ref is T_est for
// blow-up runs and the final time otherwise. Throws Io when files are missing.
LoadedRun load_run(const fs::path& run_dir);

}  // namespace bubbletower::cli
