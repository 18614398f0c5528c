#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2st/model/model.hpp"
#include "s2st/model/trainer.hpp"
#include "s2st/prompting/prompting.hpp"
#include "s2st/synthdata/synthdata.hpp"
#include "s2st/typology/typology.hpp"

namespace s2st::cli {

/// Fully resolved run configuration: every default materialized, registry and
/// prompt templates inlined. The JSON echo written by each run parses back
/// into an identical RunConfig, so reruns from the echo reproduce the run.
struct RunConfig {
  std::uint64_t seed = 1234;
  std::string out_dir = "runs/out";

  typo::Registry registry = typo::Registry::builtin();
  prompting::PromptTemplates prompts = prompting::PromptTemplates::builtin();
  synth::CorpusSpec data = synth::CorpusSpec::defaults();
  model::ModelConfig model;
  model::TrainSchedule train;
  double budget_fraction = 1.0;
  std::vector<std::uint64_t> sweep_seeds;  // defaults to {seed}

  static RunConfig defaults();
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
  std::string to_json_text() const;

  /// ConfigError on bad fields; prints a warning to stderr when stage II
  /// lambdas are not strictly below stage I (they are meant to down-weight).
  void validate() const;

  std::vector<std::uint64_t> seeds() const {
    return sweep_seeds.empty() ? std::vector<std::uint64_t>{seed} : sweep_seeds;
  }
};

}  // namespace s2st::cli
