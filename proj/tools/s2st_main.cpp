#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "s2st/cli/commands.hpp"
#include "s2st/error.hpp"

using namespace s2st;

namespace {

cli::RunConfig load_config(const std::string& path, std::uint64_t* seed_override,
                           const std::string& out_override) {
  cli::RunConfig cfg =
      path.empty() ? cli::RunConfig::defaults() : cli::RunConfig::from_json_file(path);
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.model.seed = *seed_override;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  return cfg;
}

std::vector<double> parse_fractions(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> parse_axes(const std::string& csv) {
  if (csv.empty()) return cli::all_ablation_axes();
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"typology-aware multilingual conditioning stack, desk scale"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, split = "test", fractions_csv, axes_csv, lang;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t count = 4;
  bool language_aware = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run config JSON path");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--out", out_dir, "output directory override");
  };

  CLI::App* train = app.add_subcommand("train", "run the two-stage schedule");
  add_common(train);

  CLI::App* eval = app.add_subcommand("eval", "decode a split and report metrics");
  eval->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  eval->add_option("--split", split, "train|dev|test");
  eval->add_option("--out", out_dir, "report path");

  CLI::App* ablate = app.add_subcommand("ablate", "train the full model and variants");
  add_common(ablate);
  ablate->add_option("--axes", axes_csv, "comma list of dg,ta-prompt,ti-hle,morph,reorder,family,residual");

  CLI::App* budget = app.add_subcommand("budget", "budget sweep, hierarchical vs flat");
  add_common(budget);
  budget->add_option("--fractions", fractions_csv, "comma list of fractions in (0,1]")
      ->required();

  CLI::App* inspect = app.add_subcommand("inspect-gate", "dump per-frame gate values");
  inspect->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  inspect->add_option("--lang", lang, "language code")->required();
  inspect->add_option("--count", count, "number of utterances");

  CLI::App* prompt = app.add_subcommand("prompt", "print the assembled prompt");
  prompt->add_option("--config", config_path, "run config JSON path");
  prompt->add_option("--lang", lang, "language code")->required();
  prompt->add_flag("--language-aware", language_aware, "use the label-only variant");

  CLI::App* gen = app.add_subcommand("gen-data", "write the synthetic corpus");
  add_common(gen);

  app.add_subcommand("selftest", "run oracle and gradient spot checks");

  CLI11_PARSE(app, argc, argv);

  try {
    std::uint64_t* seed_ptr = seed_set ? &seed : nullptr;
    if (train->parsed()) {
      cli::TrainOutputs out = cli::cmd_train(load_config(config_path, seed_ptr, out_dir));
      std::cout << "checkpoint: " << out.checkpoint_path << "\nmetrics: " << out.metrics_path
                << "\nconfig: " << out.config_path << "\n";
    } else if (eval->parsed()) {
      metrics::EvalReport rep = cli::cmd_eval(checkpoint, split, out_dir);
      std::cout << rep.to_json_text() << "\n";
    } else if (ablate->parsed()) {
      cli::RunConfig cfg = load_config(config_path, seed_ptr, out_dir);
      auto rows = cli::cmd_ablate(cfg, parse_axes(axes_csv), cfg.out_dir + "/ablation.json");
      std::cout << "variant\tmedian_token_error\trel_degradation\n";
      for (const auto& row : rows) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s\t%.4f\t%+.2f%%", row.variant.c_str(),
                      row.median_token_error, 100.0 * row.rel_degradation);
        std::cout << buf << "\n";
      }
    } else if (budget->parsed()) {
      cli::RunConfig cfg = load_config(config_path, seed_ptr, out_dir);
      auto records =
          cli::cmd_budget(cfg, parse_fractions(fractions_csv), cfg.out_dir + "/budget.jsonl");
      std::cout << "fraction\tvariant\tseed\ttoken_error\tbleu\n";
      for (const auto& r : records) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.3f\t%s\t%llu\t%.4f\t%.2f", r.fraction,
                      r.variant.c_str(), static_cast<unsigned long long>(r.seed),
                      r.token_error, r.bleu);
        std::cout << buf << "\n";
      }
    } else if (inspect->parsed()) {
      cli::cmd_inspect_gate(checkpoint, lang, count, std::cout);
    } else if (prompt->parsed()) {
      cli::cmd_prompt(load_config(config_path, nullptr, ""), lang, language_aware, std::cout);
    } else if (gen->parsed()) {
      cli::RunConfig cfg = load_config(config_path, seed_ptr, out_dir);
      cli::cmd_gen_data(cfg, cfg.out_dir);
      std::cout << "corpus written to " << cfg.out_dir << "\n";
    } else {
      return cli::cmd_selftest(std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UnknownLanguageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const VocabularyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
