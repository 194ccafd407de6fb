// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fclip {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// One per command invocation. `config` holds every resolved option, so the
// run can be repeated from this record alone.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string start_time;
  std::string end_time;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> artifacts;
};

nlohmann::json to_json(const RunManifest& manifest);
void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path);

// Entry point behind the `fclip` executable. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace fclip
