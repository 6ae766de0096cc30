// Copyright 2026 The DPAD Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run manifests and all-or-nothing output commits.

#ifndef DPAD_MANIFEST_H_
#define DPAD_MANIFEST_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dpad {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
// Throws kIoError.
std::string FileSha256(const std::filesystem::path& path);

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<InputDigest> inputs;
  std::string tool_version{kToolVersion};
  std::string started_utc;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;

  void AddInput(const std::filesystem::path& path);
  nlohmann::ordered_json ToJson() const;
};

// Current time as ISO-8601 UTC, second resolution.
std::string UtcTimestamp();

// Collects outputs in memory and publishes them together. Commit() writes
// every staged file to a temp sibling, then the manifest (atomically), then
// renames the temps into place. Nothing is written before Commit(), so a
// command that fails while computing leaves no output behind.
class OutputTransaction {
 public:
  void Stage(const std::filesystem::path& path, std::string contents);

  // Fills manifest.outputs with the staged paths. Throws kIoError.
  void Commit(RunManifest& manifest, const std::filesystem::path& manifest_path);

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> staged_;
};

}  // namespace dpad

#endif  // DPAD_MANIFEST_H_
