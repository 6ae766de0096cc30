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

// dpad: reward scoring, evaluation and toy training from the command line.
//
// Exit status: 0 on success, 1 on invalid input or flags, 2 on I/O failure.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "dpad/error.h"
#include "dpad/manifest.h"
#include "json.hpp"

namespace {

using dpad::cli::kExitIo;
using dpad::cli::kExitOk;
using dpad::cli::kExitValidation;

const std::vector<std::string> kVariants = {"binary", "difference", "scaled", "off"};
const std::vector<std::string> kAxes = {"query_type", "difficulty"};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);

  CLI::App app{"DPAD reward and evaluation toolkit"};
  app.set_version_flag("--version", std::string(dpad::kToolVersion));
  app.require_subcommand(1);

  dpad::cli::ScoreOptions score;
  CLI::App* score_cmd = app.add_subcommand("score", "Compose rewards for a rollout bundle");
  score_cmd->add_option("--bundle", score.bundle, "Bundle JSON")->required();
  score_cmd->add_option("--config", score.config, "Reward config JSON")->required();
  score_cmd->add_option("--out", score.out, "Breakdown JSONL output")->required();
  score_cmd->add_option("--variant", score.variant, "Override the dpad variant")
      ->check(CLI::IsMember(kVariants));
  score_cmd->add_option("--seed", score.seed, "Recorded in the manifest; scoring is deterministic");
  score_cmd->add_flag("--strict", score.strict, "Fail without output if any record fails");

  dpad::cli::EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Segmentation and discrimination metrics");
  eval_cmd->add_option("--bundle", eval.bundle, "Bundle JSON for side a");
  eval_cmd->add_option("--pred", eval.pred, "Prediction dump JSONL for side a");
  eval_cmd->add_option("--bundle-b", eval.bundle_b, "Bundle JSON for side b");
  eval_cmd->add_option("--pred-b", eval.pred_b, "Prediction dump JSONL for side b");
  eval_cmd->add_option("--out", eval.out, "Report JSON output")->required();
  eval_cmd->add_option("--strata-axis", eval.strata_axes, "Stratify by this axis (repeatable)")
      ->check(CLI::IsMember(kAxes));
  eval_cmd->add_flag("--emit-csv", eval.emit_csv, "Also write per-sample CSV");

  dpad::cli::CompareOptions compare;
  CLI::App* compare_cmd = app.add_subcommand("compare", "Diff two saved eval reports");
  compare_cmd->add_option("--a", compare.a, "Report JSON a")->required();
  compare_cmd->add_option("--b", compare.b, "Report JSON b")->required();
  compare_cmd->add_option("--out", compare.out, "Comparison JSON output")->required();

  dpad::cli::TrainToyOptions train;
  CLI::App* train_cmd = app.add_subcommand("train-toy", "GRPO on the toy scene suite");
  train_cmd->add_option("--config", train.config, "Training config JSON")->required();
  train_cmd->add_option("--out", train.out, "Trace CSV output")->required();
  train_cmd->add_option("--seed", train.seed, "Override the config seed");
  train_cmd->add_option("--variant", train.variant, "Override the dpad variant")
      ->check(CLI::IsMember(kVariants));

  dpad::cli::PackEmbeddingsOptions pack;
  CLI::App* pack_cmd = app.add_subcommand("pack-embeddings", "Convert embedding JSONL to a DPDE store");
  pack_cmd->add_option("--in", pack.in, "JSONL {sample_id, role, vector}")->required();
  pack_cmd->add_option("--out", pack.out, "DPDE output")->required();

  dpad::cli::MakeScenesOptions scenes;
  CLI::App* scenes_cmd = app.add_subcommand("make-scenes", "Write the generated toy suite as JSON");
  scenes_cmd->add_option("--config", scenes.config, "Training config JSON for suite settings");
  scenes_cmd->add_option("--out", scenes.out, "Scenes JSON output")->required();
  scenes_cmd->add_option("--seed", scenes.seed, "Override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*score_cmd) return dpad::cli::RunScore(score, args);
    if (*eval_cmd) return dpad::cli::RunEval(eval, args);
    if (*compare_cmd) return dpad::cli::RunCompare(compare, args);
    if (*train_cmd) return dpad::cli::RunTrainToy(train, args);
    if (*pack_cmd) return dpad::cli::RunPackEmbeddings(pack, args);
    if (*scenes_cmd) return dpad::cli::RunMakeScenes(scenes, args);
  } catch (const dpad::Error& e) {
    std::cerr << "error: " << e.what() << "\n";  // what() already leads with the code
    return e.code() == dpad::ErrorCode::kIoError ? kExitIo : kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [IoError]: " << e.what() << "\n";
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [SchemaMismatch]: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
