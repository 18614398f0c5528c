#include "s2st/cli/config.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "s2st/error.hpp"

namespace s2st::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& known,
                    const std::string& path) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto& k : known)
      if (key == k) ok = true;
    if (!ok) throw ConfigError("config: unknown key '" + path + key + "'");
  }
}

model::AblationSwitches parse_ablation(const json& j) {
  reject_unknown(j, {"gate", "encoding", "prompt", "channel_drop"}, "ablation.");
  model::AblationSwitches ab;
  std::string gate = j.value("gate", std::string("dynamic"));
  if (gate == "dynamic")
    ab.gate = model::GateKind::Dynamic;
  else if (gate == "static")
    ab.gate = model::GateKind::Static;
  else
    throw ConfigError("config: ablation.gate must be dynamic|static, got " + gate);
  std::string enc = j.value("encoding", std::string("hierarchical"));
  if (enc == "hierarchical")
    ab.encoding = model::EncodingKind::Hierarchical;
  else if (enc == "flat")
    ab.encoding = model::EncodingKind::Flat;
  else
    throw ConfigError("config: ablation.encoding must be hierarchical|flat, got " + enc);
  std::string pr = j.value("prompt", std::string("typology"));
  if (pr == "typology")
    ab.prompt = model::PromptKind::Typology;
  else if (pr == "language_aware")
    ab.prompt = model::PromptKind::LanguageAware;
  else
    throw ConfigError("config: ablation.prompt must be typology|language_aware, got " + pr);
  std::string drop = j.value("channel_drop", std::string("none"));
  if (drop != "none") ab.channel_drop = typo::parse_channel(drop);
  return ab;
}

json ablation_to_json(const model::AblationSwitches& ab) {
  return {{"gate", ab.gate == model::GateKind::Dynamic ? "dynamic" : "static"},
          {"encoding",
           ab.encoding == model::EncodingKind::Hierarchical ? "hierarchical" : "flat"},
          {"prompt", ab.prompt == model::PromptKind::Typology ? "typology" : "language_aware"},
          {"channel_drop", ab.channel_drop ? [&] {
             switch (*ab.channel_drop) {
               case typo::Channel::Morph: return std::string("morph");
               case typo::Channel::Reorder: return std::string("reorder");
               case typo::Channel::Family: return std::string("family");
               case typo::Channel::Residual: return std::string("residual");
             }
             return std::string("none");
           }() : std::string("none")}};
}

}  // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"seed", "out_dir", "registry", "prompts", "data", "model", "train",
                  "ablation", "budget_fraction", "sweep_seeds"},
                 "");
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  if (j.contains("registry")) {
    const json& r = j.at("registry");
    reject_unknown(r, {"path", "inline"}, "registry.");
    if (r.contains("path") == r.contains("inline"))
      throw ConfigError("config: registry needs exactly one of path|inline");
    cfg.registry = r.contains("path")
                       ? typo::Registry::from_json_file(r.at("path").get<std::string>())
                       : typo::Registry::from_json_text(r.at("inline").dump());
  }
  if (j.contains("prompts")) {
    const json& p = j.at("prompts");
    reject_unknown(p, {"path", "inline"}, "prompts.");
    if (p.contains("path") == p.contains("inline"))
      throw ConfigError("config: prompts needs exactly one of path|inline");
    cfg.prompts = p.contains("path")
                      ? prompting::PromptTemplates::from_json_file(p.at("path").get<std::string>())
                      : prompting::PromptTemplates::from_json_text(p.at("inline").dump());
  }
  if (j.contains("data")) cfg.data = synth::spec_from_json_text(j.at("data").dump());

  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m,
                   {"d_in", "d_h", "d_llm", "kernel", "stride", "conv_blocks", "attn_blocks",
                    "typology", "film_hidden", "gate_hidden", "decoder_blocks",
                    "decoder_ffn_mult", "max_positions", "lora_rank", "lora_alpha",
                    "lora_dropout"},
                   "model.");
    auto& a = cfg.model.adapter;
    a.d_in = m.value("d_in", a.d_in);
    a.d_h = m.value("d_h", a.d_h);
    a.d_llm = m.value("d_llm", a.d_llm);
    a.kernel = m.value("kernel", a.kernel);
    a.stride = m.value("stride", a.stride);
    a.conv_blocks = m.value("conv_blocks", a.conv_blocks);
    a.attn_blocks = m.value("attn_blocks", a.attn_blocks);
    if (m.contains("typology")) {
      const json& t = m.at("typology");
      reject_unknown(t, {"morph", "reorder", "family", "residual", "fused"},
                     "model.typology.");
      auto& d = cfg.model.typology;
      d.morph = t.value("morph", d.morph);
      d.reorder = t.value("reorder", d.reorder);
      d.family = t.value("family", d.family);
      d.residual = t.value("residual", d.residual);
      d.fused = t.value("fused", d.fused);
    }
    cfg.model.film_hidden = m.value("film_hidden", cfg.model.film_hidden);
    cfg.model.gate_hidden = m.value("gate_hidden", cfg.model.gate_hidden);
    auto& dec = cfg.model.decoder;
    dec.blocks = m.value("decoder_blocks", dec.blocks);
    dec.ffn_mult = m.value("decoder_ffn_mult", dec.ffn_mult);
    dec.max_positions = m.value("max_positions", dec.max_positions);
    dec.lora_rank = m.value("lora_rank", dec.lora_rank);
    dec.lora_alpha = m.value("lora_alpha", dec.lora_alpha);
    dec.lora_dropout = m.value("lora_dropout", dec.lora_dropout);
    dec.width = a.d_llm;
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t,
                   {"stage1_steps", "stage2_steps", "batch_size", "lr", "lambda",
                    "classifier_weight"},
                   "train.");
    cfg.train.stage1_steps = t.value("stage1_steps", cfg.train.stage1_steps);
    cfg.train.stage2_steps = t.value("stage2_steps", cfg.train.stage2_steps);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.lr = t.value("lr", cfg.train.lr);
    cfg.train.classifier_weight = t.value("classifier_weight", cfg.train.classifier_weight);
    if (t.contains("lambda")) {
      const json& l = t.at("lambda");
      reject_unknown(l, {"stage1_src", "stage1_tgt", "stage2_src", "stage2_tgt"},
                     "train.lambda.");
      cfg.train.stage1.lambda_src = l.value("stage1_src", cfg.train.stage1.lambda_src);
      cfg.train.stage1.lambda_tgt = l.value("stage1_tgt", cfg.train.stage1.lambda_tgt);
      cfg.train.stage2.lambda_src = l.value("stage2_src", cfg.train.stage2.lambda_src);
      cfg.train.stage2.lambda_tgt = l.value("stage2_tgt", cfg.train.stage2.lambda_tgt);
    }
  }

  if (j.contains("ablation")) cfg.model.ablation = parse_ablation(j.at("ablation"));
  cfg.budget_fraction = j.value("budget_fraction", cfg.budget_fraction);
  if (j.contains("sweep_seeds"))
    cfg.sweep_seeds = j.at("sweep_seeds").get<std::vector<std::uint64_t>>();

  cfg.model.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_json_text() const {
  json m = {{"d_in", model.adapter.d_in},
            {"d_h", model.adapter.d_h},
            {"d_llm", model.adapter.d_llm},
            {"kernel", model.adapter.kernel},
            {"stride", model.adapter.stride},
            {"conv_blocks", model.adapter.conv_blocks},
            {"attn_blocks", model.adapter.attn_blocks},
            {"typology",
             {{"morph", model.typology.morph},
              {"reorder", model.typology.reorder},
              {"family", model.typology.family},
              {"residual", model.typology.residual},
              {"fused", model.typology.fused}}},
            {"film_hidden", model.film_hidden},
            {"gate_hidden", model.gate_hidden},
            {"decoder_blocks", model.decoder.blocks},
            {"decoder_ffn_mult", model.decoder.ffn_mult},
            {"max_positions", model.decoder.max_positions},
            {"lora_rank", model.decoder.lora_rank},
            {"lora_alpha", model.decoder.lora_alpha},
            {"lora_dropout", model.decoder.lora_dropout}};
  json t = {{"stage1_steps", train.stage1_steps},
            {"stage2_steps", train.stage2_steps},
            {"batch_size", train.batch_size},
            {"lr", train.lr},
            {"classifier_weight", train.classifier_weight},
            {"lambda",
             {{"stage1_src", train.stage1.lambda_src},
              {"stage1_tgt", train.stage1.lambda_tgt},
              {"stage2_src", train.stage2.lambda_src},
              {"stage2_tgt", train.stage2.lambda_tgt}}}};
  return json{{"seed", seed},
              {"out_dir", out_dir},
              {"registry", {{"inline", json::parse(registry.to_json_text())}}},
              {"prompts", {{"inline", json::parse(prompts.to_json_text())}}},
              {"data", json::parse(synth::spec_to_json_text(data))},
              {"model", m},
              {"train", t},
              {"ablation", ablation_to_json(model.ablation)},
              {"budget_fraction", budget_fraction},
              {"sweep_seeds", seeds()}}
      .dump(2);
}

void RunConfig::validate() const {
  data.validate();
  model.adapter.validate();
  if (budget_fraction <= 0.0 || budget_fraction > 1.0)
    throw ConfigError("config: budget_fraction must lie in (0, 1]");
  for (const auto& lang : data.languages) {
    if (!registry.has(lang.code))
      throw ConfigError("config: data language '" + lang.code + "' is not in the registry");
  }
  if (train.stage2.lambda_src >= train.stage1.lambda_src ||
      train.stage2.lambda_tgt >= train.stage1.lambda_tgt) {
    std::cerr << "warning: stage II CTC weights are not strictly below stage I; "
                 "they are meant to down-weight the auxiliary losses\n";
  }
}

}  // namespace s2st::cli
