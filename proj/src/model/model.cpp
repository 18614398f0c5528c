#include "s2st/model/model.hpp"

#include <cmath>

#include "s2st/error.hpp"

namespace s2st::model {

using namespace s2st::ad;

StageObjective StageObjective::stage1(double l_src, double l_tgt) {
  return StageObjective{1, l_src, l_tgt,
                        "adapter+typology+conditioning+ctc_heads+classifier"};
}

StageObjective StageObjective::stage2(double l_src, double l_tgt) {
  return StageObjective{2, l_src, l_tgt,
                        "adapter+typology+conditioning+ctc_heads+classifier+lora"};
}

double stage_loss(double ce, double ctc_src, double ctc_tgt, const StageObjective& obj) {
  if (!std::isfinite(ce) || !std::isfinite(ctc_src) || !std::isfinite(ctc_tgt))
    throw Error("stage_loss: non-finite component");
  return ce + obj.lambda_src * ctc_src + obj.lambda_tgt * ctc_tgt;
}

Var stage_loss(Graph& g, Var ce, Var ctc_src, Var ctc_tgt, const StageObjective& obj) {
  (void)g;
  return add(add(ce, scale(ctc_src, obj.lambda_src)), scale(ctc_tgt, obj.lambda_tgt));
}

namespace {

Array init_linear(std::size_t out, std::size_t in, Rng& rng) {
  return Array::randn({out, in}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

std::map<std::string, int> index_of(const std::vector<std::string>& vocab) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < vocab.size(); ++i) idx[vocab[i]] = static_cast<int>(i);
  return idx;
}

}  // namespace

Model::Model(const ModelConfig& cfg, const typo::Registry& registry,
             const prompting::PromptTemplates& templates, const synth::Corpus& corpus)
    : cfg_(cfg),
      registry_(registry),
      templates_(templates),
      prompt_catalog_(templates),
      corpus_spec_(corpus.spec),
      src_vocab_(corpus.src_vocab),
      tgt_vocab_(corpus.tgt_vocab),
      src_index_(index_of(corpus.src_vocab)),
      tgt_index_(index_of(corpus.tgt_vocab)) {
  cfg_.adapter.validate();
  if (cfg_.decoder.width != cfg_.adapter.d_llm)
    throw ConfigError("decoder width must equal the adapter d_llm");
  for (const auto& lang : corpus_spec_.languages)
    registry_.lookup(lang.code);  // every corpus language must be registered

  // Construction order is fixed so identical seeds give identical models; the
  // flat table is always built so ablation variants share every other
  // parameter's initialization.
  Rng rng(cfg_.seed);
  standin_ = adapter::EncoderStandin(src_vocab_.size(), cfg_.adapter.d_in,
                                     hash_mix(cfg_.seed, hash_str("standin")));
  adapter_ = adapter::AdapterParams(cfg_.adapter, rng);
  tables_ = typo::TypologyTables(registry_, cfg_.typology, rng);
  fusion_ = typo::FusionParams(cfg_.typology.fused, cfg_.typology.concat_width(), rng);
  flat_ = typo::FlatTable(registry_, cfg_.typology.concat_width(), rng);
  film_ = cond::FilmGenerator(cfg_.typology.fused, cfg_.film_hidden, cfg_.adapter.d_h, rng);
  gate_ = cond::FrameGate(cfg_.adapter.d_h, cfg_.typology.fused, cfg_.gate_hidden, rng);
  static_gate_ = cond::StaticGate();
  src_head_w_ = Param("ctc.src_head_w", init_linear(src_vocab_.size() + 1, cfg_.adapter.d_h, rng));
  src_head_b_ = Param("ctc.src_head_b", Array({1, src_vocab_.size() + 1}));
  tgt_head_w_ = Param("ctc.tgt_head_w", init_linear(tgt_vocab_.size() + 1, cfg_.adapter.d_h, rng));
  tgt_head_b_ = Param("ctc.tgt_head_b", Array({1, tgt_vocab_.size() + 1}));
  cls_w_ = Param("classifier.w", init_linear(registry_.size(), cfg_.adapter.d_in, rng));
  cls_b_ = Param("classifier.b", Array({1, registry_.size()}));

  if (cfg_.ablation.channel_drop) {
    tables_.drop_channel(*cfg_.ablation.channel_drop);
    // Derived stream: rebuilding the narrower fusion matrix must not shift the
    // main init sequence, or the ablated model would stop sharing the
    // remaining parameters with the full one.
    Rng drop_rng(hash_mix(cfg_.seed, hash_str("fusion_drop")));
    fusion_ = typo::FusionParams(cfg_.typology.fused, tables_.active_width(), drop_rng);
  }

  // Embedding rows: [target words][BOS][EOS][prompt tokens].
  const std::size_t n_words = tgt_vocab_.size();
  bos_embed_id_ = static_cast<int>(n_words);
  eos_class_ = static_cast<int>(n_words);
  prompt_embed_offset_ = static_cast<int>(n_words + 2);
  const std::size_t n_embed = n_words + 2 + prompt_catalog_.size();
  decoder_ = ToyDecoder(cfg_.decoder, n_embed, n_words + 1, rng);
  class_to_embed_.resize(n_words + 1);
  for (std::size_t i = 0; i < n_words; ++i) class_to_embed_[i] = static_cast<int>(i);
  class_to_embed_[n_words] = bos_embed_id_;  // never used: eos stops generation
}

std::vector<int> Model::src_ids(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  for (const auto& tok : tokens) {
    auto it = src_index_.find(tok);
    if (it == src_index_.end()) throw VocabularyError("unknown source token: " + tok);
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> Model::tgt_ids(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  for (const auto& tok : tokens) {
    auto it = tgt_index_.find(tok);
    if (it == tgt_index_.end()) throw VocabularyError("unknown target token: " + tok);
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> Model::prompt_embed_ids(const std::string& lang) const {
  prompting::PromptSpec spec =
      cfg_.ablation.prompt == PromptKind::Typology
          ? prompting::build_prompt(lang, templates_, &prompt_catalog_)
          : prompting::language_aware_prompt(lang, templates_, &prompt_catalog_);
  std::vector<int> ids;
  for (int id : spec.ids) ids.push_back(prompt_embed_offset_ + id);
  return ids;
}

bool Model::src_ctc_feasible(const synth::ParallelUtterance& utt) const {
  std::vector<int> labels;
  for (int id : src_ids(utt.src)) labels.push_back(id + 1);
  return ctc::min_frames(labels) <= utt.src.size();
}

bool Model::tgt_ctc_feasible(const synth::ParallelUtterance& utt) const {
  std::vector<int> labels;
  for (int id : tgt_ids(utt.tgt)) labels.push_back(id + 1);
  return ctc::min_frames(labels) <= utt.src.size();
}

Model::AdapterRun Model::run_adapter(Graph& g, const synth::ParallelUtterance& utt,
                                     bool want_grad) {
  const auto& lang_spec = corpus_spec_.language(utt.lang);
  Array feats = standin_.encode(src_ids(utt.src), lang_spec.noise, utt.id);
  const std::size_t frames = feats.rows();
  Var x = g.constant(std::move(feats));
  adapter::AdapterOut out = adapter_forward(g, x, frames, adapter_, cfg_.adapter, want_grad);
  return AdapterRun{out.h_down, out.z};
}

Var Model::language_repr_var(Graph& g, const std::string& lang, bool want_grad) {
  if (cfg_.ablation.encoding == EncodingKind::Hierarchical)
    return typo::fuse(g, registry_.lookup(lang), tables_, fusion_, want_grad);
  return typo::flat_fuse(g, lang, registry_, flat_, fusion_, want_grad);
}

Array Model::language_repr(const std::string& lang) {
  Graph g;
  return language_repr_var(g, lang, false).value();
}

UttLosses Model::forward_utterance(Graph& g, const synth::ParallelUtterance& utt,
                                   bool train_mode, Rng* dropout_rng, bool want_grad) {
  AdapterRun run = run_adapter(g, utt, want_grad);
  const std::size_t frames = run.h_down.value().rows();

  // typology-conditioned source branch
  Var r = language_repr_var(g, utt.lang, want_grad);
  cond::FilmParams fp = cond::film(g, r, film_, want_grad);
  Var gates = cfg_.ablation.gate == GateKind::Dynamic
                  ? cond::gate_series(g, run.h_down, r, gate_, want_grad)
                  : cond::static_gate_series(g, frames, static_gate_, want_grad);
  Var h_src = cond::modulate(g, run.h_down, fp, gates);

  UttLosses losses;
  {
    Var logits = linear(h_src, g.use(src_head_w_, want_grad), g.use(src_head_b_, want_grad));
    std::vector<int> labels;
    for (int id : src_ids(utt.src)) labels.push_back(id + 1);
    if (ctc::min_frames(labels) <= frames)
      losses.ctc_src = ctc::ctc_loss(g, log_softmax(logits), labels);
  }
  {
    // target branch reads the unmodulated features only
    Var logits =
        linear(run.h_down, g.use(tgt_head_w_, want_grad), g.use(tgt_head_b_, want_grad));
    std::vector<int> labels;
    for (int id : tgt_ids(utt.tgt)) labels.push_back(id + 1);
    if (ctc::min_frames(labels) <= frames)
      losses.ctc_tgt = ctc::ctc_loss(g, log_softmax(logits), labels);
  }

  // decoder cross-entropy over [words..., EOS], prompt positions excluded
  {
    std::vector<int> words = tgt_ids(utt.tgt);
    // teacher inputs [BOS, w_0..w_{m-1}] predict targets [w_0..w_{m-1}, EOS]
    std::vector<int> teacher{bos_embed_id_};
    for (std::size_t i = 0; i < words.size(); ++i) teacher.push_back(words[i]);
    Var logits = decoder_.forward(g, prompt_embed_ids(utt.lang), run.z, teacher, train_mode,
                                  dropout_rng, want_grad);
    Var lsm = log_softmax(logits);
    const std::size_t n_pos = teacher.size();
    Array onehot({n_pos, tgt_vocab_.size() + 1});
    for (std::size_t i = 0; i < words.size(); ++i)
      onehot.at(i, static_cast<std::size_t>(words[i])) = 1.0;
    onehot.at(words.size(), static_cast<std::size_t>(eos_class_)) = 1.0;
    losses.ce = scale(sum(mul(lsm, g.constant(onehot))), -1.0 / static_cast<double>(n_pos));
  }

  // language classifier on pooled stand-in features (auxiliary, stage I)
  {
    const auto& lang_spec = corpus_spec_.language(utt.lang);
    Array feats = standin_.encode(src_ids(utt.src), lang_spec.noise, utt.id);
    Array pool({1, feats.rows()});
    pool.fill(1.0 / static_cast<double>(feats.rows()));
    Var pooled = matmul(g.constant(std::move(pool)), g.constant(std::move(feats)));
    Var logits = linear(pooled, g.use(cls_w_, want_grad), g.use(cls_b_, want_grad));
    Var lsm = log_softmax(logits);
    Array onehot({1, registry_.size()});
    onehot.at(0, static_cast<std::size_t>(registry_.index_of(utt.lang))) = 1.0;
    losses.classifier_ce = scale(sum(mul(lsm, g.constant(onehot))), -1.0);
  }
  return losses;
}

std::string Model::predict_language(const std::vector<std::string>& src_tokens,
                                    std::uint64_t utt_id) const {
  std::vector<int> ids;
  for (const auto& tok : src_tokens) {
    auto it = src_index_.find(tok);
    if (it == src_index_.end()) throw VocabularyError("unknown source token: " + tok);
    ids.push_back(it->second);
  }
  // Inference does not know the language, so the stand-in noise level is the
  // mean configured level (noise only simulates acoustic variation).
  double noise = 0.0;
  for (const auto& l : corpus_spec_.languages) noise += l.noise;
  noise /= static_cast<double>(corpus_spec_.languages.size());
  Array feats = standin_.encode(ids, noise, utt_id);
  std::vector<double> pooled(cfg_.adapter.d_in, 0.0);
  for (std::size_t r = 0; r < feats.rows(); ++r)
    for (std::size_t c = 0; c < feats.cols(); ++c) pooled[c] += feats.at(r, c);
  for (double& v : pooled) v /= static_cast<double>(feats.rows());
  int best = 0;
  double best_score = -1e300;
  for (std::size_t k = 0; k < registry_.size(); ++k) {
    double score = cls_b_.value[k];
    for (std::size_t c = 0; c < pooled.size(); ++c) score += cls_w_.value.at(k, c) * pooled[c];
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(k);
    }
  }
  return registry_.languages()[static_cast<std::size_t>(best)].code;
}

std::vector<std::string> Model::translate(const std::vector<std::string>& src_tokens,
                                          std::uint64_t utt_id) {
  std::string lang = predict_language(src_tokens, utt_id);
  Graph g;
  synth::ParallelUtterance pseudo;
  pseudo.id = utt_id;
  pseudo.lang = lang;
  pseudo.src = src_tokens;
  AdapterRun run = run_adapter(g, pseudo, /*want_grad=*/false);
  std::vector<int> ids =
      decoder_.generate(prompt_embed_ids(lang), run.z.value(), bos_embed_id_, eos_class_,
                        class_to_embed_, corpus_spec_.max_len + 4);
  std::vector<std::string> out;
  for (int id : ids) out.push_back(tgt_vocab_[static_cast<std::size_t>(id)]);
  return out;
}

std::vector<double> Model::inspect_gate(const std::vector<std::string>& src_tokens,
                                        const std::string& lang, std::uint64_t utt_id) {
  Graph g;
  synth::ParallelUtterance pseudo;
  pseudo.id = utt_id;
  pseudo.lang = lang;
  pseudo.src = src_tokens;
  AdapterRun run = run_adapter(g, pseudo, false);
  Var r = language_repr_var(g, lang, false);
  Var gates = cfg_.ablation.gate == GateKind::Dynamic
                  ? cond::gate_series(g, run.h_down, r, gate_, false)
                  : cond::static_gate_series(g, run.h_down.value().rows(), static_gate_, false);
  return gates.value().vec();
}

std::vector<Param*> Model::all_params() {
  std::vector<Param*> out;
  out.push_back(&standin_.table());
  for (Param* p : adapter_.params()) out.push_back(p);
  for (Param* p : {&tables_.morph, &tables_.reorder, &tables_.family, &tables_.residual,
                   &fusion_.w, &fusion_.b, &fusion_.ln_gain, &fusion_.ln_bias, &flat_.table,
                   &film_.w1, &film_.b1, &film_.w2, &film_.b2, &gate_.w1, &gate_.b1, &gate_.w2,
                   &gate_.b2, &gate_.tau_learn, &static_gate_.logit, &src_head_w_, &src_head_b_,
                   &tgt_head_w_, &tgt_head_b_, &cls_w_, &cls_b_})
    out.push_back(p);
  for (Param* p : decoder_.base_params()) out.push_back(p);
  for (Param* p : decoder_.lora_params()) out.push_back(p);
  return out;
}

std::vector<Param*> Model::trainable_params(int stage) {
  std::vector<Param*> out;
  for (Param* p : adapter_.params()) out.push_back(p);
  if (cfg_.ablation.encoding == EncodingKind::Hierarchical) {
    for (Param* p : {&tables_.morph, &tables_.reorder, &tables_.family, &tables_.residual})
      out.push_back(p);
  } else {
    out.push_back(&flat_.table);
  }
  for (Param* p : {&fusion_.w, &fusion_.b, &fusion_.ln_gain, &fusion_.ln_bias}) out.push_back(p);
  for (Param* p : {&film_.w1, &film_.b1, &film_.w2, &film_.b2}) out.push_back(p);
  if (cfg_.ablation.gate == GateKind::Dynamic) {
    for (Param* p : {&gate_.w1, &gate_.b1, &gate_.w2, &gate_.b2, &gate_.tau_learn})
      out.push_back(p);
  } else {
    out.push_back(&static_gate_.logit);
  }
  for (Param* p : {&src_head_w_, &src_head_b_, &tgt_head_w_, &tgt_head_b_, &cls_w_, &cls_b_})
    out.push_back(p);
  if (stage >= 2)
    for (Param* p : decoder_.lora_params()) out.push_back(p);
  return out;
}

std::vector<Param*> Model::frozen_params() {
  std::vector<Param*> out{&standin_.table()};
  for (Param* p : decoder_.base_params()) out.push_back(p);
  return out;
}

}  // namespace s2st::model
