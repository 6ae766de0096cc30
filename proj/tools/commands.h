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

// Subcommands of the dpad binary. Each returns a process exit status and
// lets dpad::Error propagate; main() maps errors to statuses.

#ifndef DPAD_TOOLS_COMMANDS_H_
#define DPAD_TOOLS_COMMANDS_H_

#include <optional>
#include <string>
#include <vector>

namespace dpad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

struct ScoreOptions {
  std::string bundle;
  std::string config;
  std::string out;
  std::optional<std::string> variant;
  std::optional<uint64_t> seed;
  bool strict = false;
};

struct EvalOptions {
  std::optional<std::string> bundle, pred;
  std::optional<std::string> bundle_b, pred_b;
  std::string out;
  std::vector<std::string> strata_axes;
  bool emit_csv = false;
};

struct CompareOptions {
  std::string a;
  std::string b;
  std::string out;
};

struct TrainToyOptions {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  std::optional<std::string> variant;
};

struct PackEmbeddingsOptions {
  std::string in;
  std::string out;
};

struct MakeScenesOptions {
  std::optional<std::string> config;
  std::string out;
  std::optional<uint64_t> seed;
};

// `argv` is recorded verbatim in the run manifest.
int RunScore(const ScoreOptions& opt, const std::vector<std::string>& argv);
int RunEval(const EvalOptions& opt, const std::vector<std::string>& argv);
int RunCompare(const CompareOptions& opt, const std::vector<std::string>& argv);
int RunTrainToy(const TrainToyOptions& opt, const std::vector<std::string>& argv);
int RunPackEmbeddings(const PackEmbeddingsOptions& opt, const std::vector<std::string>& argv);
int RunMakeScenes(const MakeScenesOptions& opt, const std::vector<std::string>& argv);

}  // namespace dpad::cli

#endif  // DPAD_TOOLS_COMMANDS_H_
