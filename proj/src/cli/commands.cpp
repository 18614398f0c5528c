#include "s2st/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "s2st/core/grad_check.hpp"
#include "s2st/core/kernels.hpp"
#include "s2st/ctc/ctc.hpp"
#include "s2st/error.hpp"
#include "s2st/model/checkpoint.hpp"

namespace s2st::cli {

using nlohmann::json;

model::Model build_model(const RunConfig& cfg, const synth::Corpus& corpus,
                         std::uint64_t seed) {
  model::ModelConfig mc = cfg.model;
  mc.seed = seed;
  return model::Model(mc, cfg.registry, cfg.prompts, corpus);
}

metrics::EvalReport eval_model(model::Model& m,
                               const std::vector<synth::ParallelUtterance>& split) {
  const std::size_t n = split.size();
  std::vector<metrics::TokenSeq> hyps(n), refs(n);
  std::vector<std::string> langs(n);
  std::string worker_error;
#pragma omp parallel for schedule(dynamic)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    try {
      hyps[i] = m.translate(split[i].src, split[i].id);
      refs[i] = split[i].tgt;
      langs[i] = split[i].lang;
    } catch (const std::exception& e) {
#pragma omp critical
      if (worker_error.empty()) worker_error = e.what();
    }
  }
  if (!worker_error.empty()) throw Error("eval: " + worker_error);
  return metrics::evaluate(hyps, refs, langs);
}

std::string metrics_to_jsonl(const std::vector<model::StepRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << json{{"step", r.step},
                {"stage", r.stage},
                {"ce", r.ce},
                {"ctc_src", r.ctc_src},
                {"ctc_tgt", r.ctc_tgt},
                {"total", r.total}}
               .dump()
        << '\n';
  }
  return out.str();
}

TrainOutputs cmd_train(const RunConfig& cfg) {
  cfg.validate();
  synth::Corpus corpus = synth::generate_corpus(cfg.data);
  if (cfg.budget_fraction < 1.0)
    corpus = synth::budget_subset(corpus, cfg.budget_fraction, cfg.seed);

  model::Model m = build_model(cfg, corpus, cfg.seed);
  model::Trainer trainer(m, cfg.train, cfg.seed);
  std::vector<model::StepRecord> records = trainer.run(corpus);

  std::filesystem::create_directories(cfg.out_dir);
  TrainOutputs out;
  out.config_path = cfg.out_dir + "/config.json";
  out.metrics_path = cfg.out_dir + "/metrics.jsonl";
  out.checkpoint_path = cfg.out_dir + "/checkpoint.bin";
  {
    std::ofstream f(out.config_path);
    f << cfg.to_json_text() << '\n';
  }
  {
    std::ofstream f(out.metrics_path);
    f << metrics_to_jsonl(records);
  }
  model::save_checkpoint(out.checkpoint_path, m.all_params(), cfg.to_json_text());
  out.records = std::move(records);
  return out;
}

metrics::EvalReport cmd_eval(const std::string& checkpoint_path, const std::string& split,
                             const std::string& report_path) {
  model::LoadedCheckpoint ckpt = model::load_checkpoint(checkpoint_path);
  RunConfig cfg = RunConfig::from_json_text(ckpt.config_json);
  synth::Corpus corpus = synth::generate_corpus(cfg.data);
  model::Model m = build_model(cfg, corpus, cfg.seed);
  model::restore_params(ckpt, m.all_params());
  metrics::EvalReport report = eval_model(m, corpus.split(split));
  std::string path = report_path.empty()
                         ? (std::filesystem::path(checkpoint_path).parent_path() /
                            ("report_" + split + ".json"))
                               .string()
                         : report_path;
  std::ofstream f(path);
  f << report.to_json_text() << '\n';
  return report;
}

std::vector<std::string> all_ablation_axes() {
  return {"dg", "ta-prompt", "ti-hle", "morph", "reorder", "family", "residual"};
}

RunConfig apply_axis(const RunConfig& cfg, const std::string& axis) {
  RunConfig out = cfg;
  if (axis == "full") return out;
  if (axis == "dg")
    out.model.ablation.gate = model::GateKind::Static;
  else if (axis == "ta-prompt")
    out.model.ablation.prompt = model::PromptKind::LanguageAware;
  else if (axis == "ti-hle")
    out.model.ablation.encoding = model::EncodingKind::Flat;
  else if (axis == "morph" || axis == "reorder" || axis == "family" || axis == "residual")
    out.model.ablation.channel_drop = typo::parse_channel(axis);
  else
    throw ConfigError("unknown ablation axis: " + axis);
  return out;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RunScores {
  double token_error = 0.0;
  double bleu = 0.0;
};

RunScores train_and_eval(const RunConfig& cfg, const synth::Corpus& corpus,
                         std::uint64_t seed) {
  model::Model m = build_model(cfg, corpus, seed);
  model::Trainer trainer(m, cfg.train, seed);
  trainer.run(corpus);
  metrics::EvalReport rep = eval_model(m, corpus.dev);
  return RunScores{rep.token_error, rep.bleu};
}

}  // namespace

std::vector<AblateRow> cmd_ablate(const RunConfig& cfg, const std::vector<std::string>& axes,
                                  const std::string& out_path) {
  for (const auto& axis : axes) apply_axis(cfg, axis);  // reject unknown axes up front
  synth::Corpus corpus = synth::generate_corpus(cfg.data);
  if (cfg.budget_fraction < 1.0)
    corpus = synth::budget_subset(corpus, cfg.budget_fraction, cfg.seed);

  std::vector<std::string> variants{"full"};
  variants.insert(variants.end(), axes.begin(), axes.end());
  std::vector<AblateRow> rows;
  for (const auto& variant : variants) {
    RunConfig vcfg = apply_axis(cfg, variant);
    AblateRow row;
    row.variant = variant;
    std::vector<double> bleu;
    for (std::uint64_t seed : cfg.seeds()) {
      RunScores s = train_and_eval(vcfg, corpus, seed);
      row.per_seed_token_error.push_back(s.token_error);
      bleu.push_back(s.bleu);
    }
    row.median_token_error = median(row.per_seed_token_error);
    row.median_bleu = median(bleu);
    rows.push_back(std::move(row));
  }
  const double full_err = rows[0].median_token_error;
  for (auto& row : rows)
    row.rel_degradation =
        full_err > 0.0 ? (row.median_token_error - full_err) / full_err : 0.0;

  if (!out_path.empty()) {
    json j = json::array();
    for (const auto& row : rows)
      j.push_back({{"variant", row.variant},
                   {"median_token_error", row.median_token_error},
                   {"median_bleu", row.median_bleu},
                   {"rel_degradation", row.rel_degradation},
                   {"per_seed_token_error", row.per_seed_token_error}});
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
    std::ofstream f(out_path);
    f << j.dump(2) << '\n';
  }
  return rows;
}

std::vector<BudgetRecord> cmd_budget(const RunConfig& cfg, const std::vector<double>& fractions,
                                     const std::string& out_path) {
  for (double f : fractions)
    if (f <= 0.0 || f > 1.0) throw ConfigError("budget fractions must lie in (0, 1]");
  synth::Corpus base = synth::generate_corpus(cfg.data);
  std::vector<BudgetRecord> records;
  for (double fraction : fractions) {
    synth::Corpus subset =
        fraction < 1.0 ? synth::budget_subset(base, fraction, cfg.seed) : base;
    for (const char* variant : {"hierarchical", "flat"}) {
      RunConfig vcfg = cfg;
      vcfg.model.ablation.encoding = std::string(variant) == "flat"
                                         ? model::EncodingKind::Flat
                                         : model::EncodingKind::Hierarchical;
      for (std::uint64_t seed : cfg.seeds()) {
        RunScores s = train_and_eval(vcfg, subset, seed);
        records.push_back(BudgetRecord{fraction, variant, seed, s.token_error, s.bleu});
      }
    }
  }
  if (!out_path.empty()) {
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
    std::ofstream f(out_path);
    for (const auto& r : records)
      f << json{{"fraction", r.fraction},
                {"variant", r.variant},
                {"seed", r.seed},
                {"token_error", r.token_error},
                {"bleu", r.bleu}}
               .dump()
        << '\n';
  }
  return records;
}

void cmd_gen_data(const RunConfig& cfg, const std::string& dir) {
  synth::Corpus corpus = synth::generate_corpus(cfg.data);
  if (cfg.budget_fraction < 1.0)
    corpus = synth::budget_subset(corpus, cfg.budget_fraction, cfg.seed);
  synth::write_corpus(corpus, dir);
}

void cmd_inspect_gate(const std::string& checkpoint_path, const std::string& lang,
                      std::size_t count, std::ostream& out) {
  model::LoadedCheckpoint ckpt = model::load_checkpoint(checkpoint_path);
  RunConfig cfg = RunConfig::from_json_text(ckpt.config_json);
  synth::Corpus corpus = synth::generate_corpus(cfg.data);
  model::Model m = build_model(cfg, corpus, cfg.seed);
  model::restore_params(ckpt, m.all_params());
  std::size_t done = 0;
  for (const auto& utt : corpus.dev) {
    if (utt.lang != lang) continue;
    std::vector<double> gates = m.inspect_gate(utt.src, utt.lang, utt.id);
    char buf[64];
    for (std::size_t t = 0; t < gates.size(); ++t) {
      std::snprintf(buf, sizeof(buf), "%llu %zu %.17g",
                    static_cast<unsigned long long>(utt.id), t, gates[t]);
      out << buf << '\n';
    }
    if (++done >= count) break;
  }
  if (done == 0) throw UnknownLanguageError("no dev utterances for language " + lang);
}

void cmd_prompt(const RunConfig& cfg, const std::string& lang, bool language_aware,
                std::ostream& out) {
  prompting::PromptSpec spec = language_aware
                                   ? prompting::language_aware_prompt(lang, cfg.prompts)
                                   : prompting::build_prompt(lang, cfg.prompts);
  if (spec.fallback_warning)
    out << "# warning: language '" << lang << "' has no template; system text only\n";
  out << spec.assembled << '\n';
}

int cmd_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << '\n';
    if (!ok) ++failures;
  };

  {
    Rng rng(1337);
    Array a = Array::randn({5, 7}, rng), b = Array::randn({7, 3}, rng);
    Array c1({5, 3}), c2({5, 3});
    kernels::matmul(c1.data(), a.data(), b.data(), 5, 7, 3);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < 7; ++k) acc += a.at(i, k) * b.at(k, j);
        c2.at(i, j) = acc;
      }
    check("matmul matches naive triple loop", c1.vec() == c2.vec());
  }
  {
    Rng rng(7);
    bool ok = true;
    for (int rep = 0; rep < 40 && ok; ++rep) {
      std::size_t t = static_cast<std::size_t>(rng.uniform_int(1, 5));
      std::size_t v = static_cast<std::size_t>(rng.uniform_int(1, 3));
      ad::Graph g;
      Array lat = ad::log_softmax(g.input(Array::randn({t, v + 1}, rng))).value();
      std::vector<int> labels{rng.uniform_int(1, static_cast<int>(v))};
      double fb = ctc::ctc_loss_value(lat, labels);
      double bf = ctc::ctc_brute_force(lat, labels);
      ok = std::isinf(fb) ? std::isinf(bf) : std::abs(fb - bf) < 1e-8;
    }
    check("ctc forward-backward agrees with brute force", ok);
  }
  {
    ad::Graph g;
    Rng rng(11);
    Array lat = ad::log_softmax(g.input(Array::randn({4, 4}, rng))).value();
    double err = ad::grad_check(
        [](ad::Graph& gg, ad::Var v) { return ctc::ctc_loss(gg, v, {1, 2}); }, lat);
    check("ctc gradient passes central differences", err < 1e-4);
  }
  {
    check("stage I loss arithmetic",
          model::stage_loss(1.0, 2.0, 3.0, model::StageObjective::stage1()) == 1.8);
    check("stage II loss arithmetic",
          model::stage_loss(1.0, 2.0, 3.0, model::StageObjective::stage2()) == 1.17);
  }
  {
    std::vector<metrics::TokenSeq> same = {{"a", "b", "c", "d"}};
    check("bleu identical corpus = 100",
          std::abs(metrics::corpus_bleu(same, same) - 100.0) < 1e-9);
    double b = metrics::corpus_bleu({{"the", "cat", "sat"}}, {{"the", "cat", "sat", "down"}});
    double want = 100.0 * std::exp(1.0 - 4.0 / 3.0) * std::exp(std::log(0.5) / 4.0);
    check("bleu single-pair oracle", std::abs(b - want) < 0.01);
  }
  {
    Rng rng(23);
    typo::Registry reg = typo::Registry::builtin();
    typo::TypologyDims dims;
    dims.morph = dims.reorder = dims.family = 4;
    dims.residual = 6;
    dims.fused = 8;
    typo::TypologyTables tables(reg, dims, rng);
    typo::FusionParams fusion(dims.fused, dims.concat_width(), rng);
    auto loss = [&](ad::Graph& g) {
      return ad::mean(typo::fuse(g, reg.lookup("de"), tables, fusion));
    };
    check("fuse gradient (typology tables)", ad::grad_check_param(tables.residual, loss) < 1e-4);
    cond::FilmGenerator gen(dims.fused, 6, 5, rng);
    cond::FrameGate fg(5, dims.fused, 6, rng);
    Array h = Array::randn({3, 5}, rng);
    auto mod = [&](ad::Graph& g) {
      ad::Var r = typo::fuse(g, reg.lookup("fr"), tables, fusion);
      cond::FilmParams fp = cond::film(g, r, gen);
      ad::Var gates = cond::gate_series(g, g.input(h), r, fg);
      return ad::mean(cond::modulate(g, g.input(h), fp, gates));
    };
    check("film/gate/modulate gradient incl. tau_learn",
          ad::grad_check_param(fg.tau_learn, mod) < 1e-4 &&
              ad::grad_check_param(gen.w2, mod) < 1e-4);
    model::LoraAdapter lora("selftest.lora", 4, 5, 2, 8.0, 0.0, rng);
    ad::Param w("selftest.w", Array::randn({4, 5}, rng));
    lora.b.value = Array::randn({4, 2}, rng, 0.3);
    Array x = Array::randn({3, 5}, rng);
    auto lf = [&](ad::Graph& g) {
      return ad::mean(model::lora_linear(g, g.input(x), w, nullptr, &lora, false, nullptr, true));
    };
    check("lora gradient", ad::grad_check_param(lora.a, lf) < 1e-4);
  }
  out << (failures == 0 ? "selftest: all checks passed\n"
                        : "selftest: " + std::to_string(failures) + " checks failed\n");
  return failures == 0 ? 0 : 2;
}

}  // namespace s2st::cli
