#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "s2st/cli/config.hpp"
#include "s2st/metrics/metrics.hpp"
#include "s2st/model/model.hpp"
#include "s2st/model/trainer.hpp"

namespace s2st::cli {

struct TrainOutputs {
  std::string checkpoint_path;
  std::string metrics_path;
  std::string config_path;
  std::vector<model::StepRecord> records;
};

/// Runs both stages, then writes checkpoint.bin, metrics.jsonl, and the
/// resolved config echo into cfg.out_dir. Byte-identical given (config, seed).
TrainOutputs cmd_train(const RunConfig& cfg);

/// Greedy decoding with per-language prompts over the named split of the
/// corpus regenerated from the checkpoint's config echo. Writes report.json
/// next to the checkpoint when report_path is empty.
metrics::EvalReport cmd_eval(const std::string& checkpoint_path, const std::string& split,
                             const std::string& report_path = "");

struct AblateRow {
  std::string variant;
  double median_token_error = 0.0;
  double median_bleu = 0.0;
  double rel_degradation = 0.0;  // (variant - full) / full, on token error
  std::vector<double> per_seed_token_error;
};

/// Trains the full model plus one variant per axis under identical corpora and
/// seeds; rows are medians across seeds.
std::vector<AblateRow> cmd_ablate(const RunConfig& cfg, const std::vector<std::string>& axes,
                                  const std::string& out_path = "");

struct BudgetRecord {
  double fraction = 1.0;
  std::string variant;  // "hierarchical" or "flat"
  std::uint64_t seed = 0;
  double token_error = 0.0;
  double bleu = 0.0;
};

/// Paired nested subsets shared between the hierarchical and flat encodings at
/// each budget fraction, one run per sweep seed.
std::vector<BudgetRecord> cmd_budget(const RunConfig& cfg, const std::vector<double>& fractions,
                                     const std::string& out_path = "");

void cmd_gen_data(const RunConfig& cfg, const std::string& dir);

/// Line-delimited numeric records: utterance id, frame index, g_t.
void cmd_inspect_gate(const std::string& checkpoint_path, const std::string& lang,
                      std::size_t count, std::ostream& out);

void cmd_prompt(const RunConfig& cfg, const std::string& lang, bool language_aware,
                std::ostream& out);

/// Oracle and gradient spot-checks; prints one line per check. Returns 0 when
/// everything passes, 2 otherwise.
int cmd_selftest(std::ostream& out);

// shared plumbing (also used by the test suites)
model::Model build_model(const RunConfig& cfg, const synth::Corpus& corpus, std::uint64_t seed);
metrics::EvalReport eval_model(model::Model& m, const std::vector<synth::ParallelUtterance>& split);
std::string metrics_to_jsonl(const std::vector<model::StepRecord>& records);
std::vector<std::string> all_ablation_axes();
RunConfig apply_axis(const RunConfig& cfg, const std::string& axis);

}  // namespace s2st::cli
