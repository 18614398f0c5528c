#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2st/adapter/adapter.hpp"
#include "s2st/conditioning/conditioning.hpp"
#include "s2st/ctc/ctc.hpp"
#include "s2st/model/decoder.hpp"
#include "s2st/prompting/prompting.hpp"
#include "s2st/synthdata/synthdata.hpp"
#include "s2st/typology/typology.hpp"

namespace s2st::model {

enum class GateKind { Dynamic, Static };
enum class EncodingKind { Hierarchical, Flat };
enum class PromptKind { Typology, LanguageAware };

struct AblationSwitches {
  GateKind gate = GateKind::Dynamic;
  EncodingKind encoding = EncodingKind::Hierarchical;
  PromptKind prompt = PromptKind::Typology;
  std::optional<typo::Channel> channel_drop;
};

struct ModelConfig {
  adapter::AdapterConfig adapter;
  typo::TypologyDims typology;
  std::size_t film_hidden = 512;
  std::size_t gate_hidden = 256;
  DecoderConfig decoder;
  AblationSwitches ablation;
  std::uint64_t seed = 1234;
};

/// Per-stage loss weights and trainable-set descriptor.
struct StageObjective {
  int stage = 1;
  double lambda_src = 0.1;
  double lambda_tgt = 0.2;
  std::string trainable = "adapter+typology+conditioning+ctc_heads+classifier";

  static StageObjective stage1(double l_src = 0.1, double l_tgt = 0.2);
  static StageObjective stage2(double l_src = 0.01, double l_tgt = 0.05);
};

/// ce + lambda_src * ctc_src + lambda_tgt * ctc_tgt, evaluated left to right.
double stage_loss(double ce, double ctc_src, double ctc_tgt, const StageObjective& obj);
ad::Var stage_loss(ad::Graph& g, ad::Var ce, ad::Var ctc_src, ad::Var ctc_tgt,
                   const StageObjective& obj);

struct UttLosses {
  ad::Var ce;
  std::optional<ad::Var> ctc_src;  // absent when the instance is CTC-infeasible
  std::optional<ad::Var> ctc_tgt;
  ad::Var classifier_ce;
};

/// Everything trained at desk scale: encoder stand-in -> adapter ->
/// typology-conditioned dual-CTC branches -> frozen decoder with optional
/// low-rank adapters, plus the language classifier and prompt machinery.
class Model {
 public:
  Model(const ModelConfig& cfg, const typo::Registry& registry,
        const prompting::PromptTemplates& templates, const synth::Corpus& corpus);

  const ModelConfig& config() const { return cfg_; }
  const typo::Registry& registry() const { return registry_; }

  /// Training-mode forward: source head reads the gated FiLM-modulated
  /// features, target head and decoder read the unmodulated path. Uses the
  /// gold language label.
  UttLosses forward_utterance(ad::Graph& g, const synth::ParallelUtterance& utt,
                              bool train_mode, Rng* dropout_rng, bool want_grad = true);

  /// Inference: encoder -> adapter -> Z -> prompted greedy decoding. The
  /// conditioning stack and both CTC heads are never evaluated. The prompt is
  /// selected by the predicted source language.
  std::vector<std::string> translate(const std::vector<std::string>& src_tokens,
                                     std::uint64_t utt_id);

  std::string predict_language(const std::vector<std::string>& src_tokens,
                               std::uint64_t utt_id) const;

  /// Per-frame dynamic-gate values for one utterance (diagnostics).
  std::vector<double> inspect_gate(const std::vector<std::string>& src_tokens,
                                   const std::string& lang, std::uint64_t utt_id);

  /// Parameter sets. "frozen" = encoder stand-in + decoder base; these never
  /// appear in any trainable set.
  std::vector<ad::Param*> all_params();
  std::vector<ad::Param*> trainable_params(int stage);
  std::vector<ad::Param*> frozen_params();

  std::vector<int> prompt_embed_ids(const std::string& lang) const;
  int src_vocab_size() const { return static_cast<int>(src_vocab_.size()); }
  int tgt_vocab_size() const { return static_cast<int>(tgt_vocab_.size()); }

  ToyDecoder& decoder() { return decoder_; }
  cond::FrameGate& frame_gate() { return gate_; }
  cond::FilmGenerator& film_generator() { return film_; }
  typo::TypologyTables& typology_tables() { return tables_; }
  typo::FusionParams& fusion_params() { return fusion_; }
  adapter::EncoderStandin& standin() { return standin_; }
  ad::Param& src_head_w() { return src_head_w_; }
  ad::Param& tgt_head_w() { return tgt_head_w_; }

  /// r_lang for a language under the configured encoding (fresh graph).
  Array language_repr(const std::string& lang);

  std::vector<int> src_ids(const std::vector<std::string>& tokens) const;
  std::vector<int> tgt_ids(const std::vector<std::string>& tokens) const;
  std::string tgt_token(int id) const { return tgt_vocab_[static_cast<std::size_t>(id)]; }

  /// CTC feasibility of an utterance given the x2 upsampling and /2
  /// downsampling (frames available = source token count).
  bool src_ctc_feasible(const synth::ParallelUtterance& utt) const;
  bool tgt_ctc_feasible(const synth::ParallelUtterance& utt) const;

 private:
  struct AdapterRun {
    ad::Var h_down;
    ad::Var z;
  };
  AdapterRun run_adapter(ad::Graph& g, const synth::ParallelUtterance& utt, bool want_grad);
  ad::Var language_repr_var(ad::Graph& g, const std::string& lang, bool want_grad);

  ModelConfig cfg_;
  typo::Registry registry_;
  prompting::PromptTemplates templates_;
  prompting::PromptCatalog prompt_catalog_;
  synth::CorpusSpec corpus_spec_;

  std::vector<std::string> src_vocab_, tgt_vocab_;
  std::map<std::string, int> src_index_, tgt_index_;

  adapter::EncoderStandin standin_;
  adapter::AdapterParams adapter_;
  typo::TypologyTables tables_;
  typo::FusionParams fusion_;
  typo::FlatTable flat_;
  cond::FilmGenerator film_;
  cond::FrameGate gate_;
  cond::StaticGate static_gate_;
  ad::Param src_head_w_, src_head_b_;  // d_h -> V_src + 1
  ad::Param tgt_head_w_, tgt_head_b_;  // d_h -> V_tgt + 1
  ad::Param cls_w_, cls_b_;            // d_in -> n_languages
  ToyDecoder decoder_;

  int bos_embed_id_ = 0;
  int eos_class_ = 0;
  int prompt_embed_offset_ = 0;
  std::vector<int> class_to_embed_;
};

}  // namespace s2st::model
