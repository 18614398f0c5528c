#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "s2st/core/graph.hpp"
#include "s2st/core/ops.hpp"
#include "s2st/core/rng.hpp"

namespace s2st::model {

using s2st::ad::Graph;
using s2st::ad::Param;
using s2st::ad::Var;

/// Low-rank adapter on a frozen projection: out = W x + (alpha/r) B (A x).
/// B starts at zero so the adapter is a no-op until trained; dropout acts on
/// the adapter input path during training only.
struct LoraAdapter {
  Param a;  // (r x d_in)
  Param b;  // (d_out x r), zero-initialized
  std::size_t rank = 8;
  double alpha = 32.0;
  double dropout = 0.1;

  LoraAdapter() = default;
  LoraAdapter(const std::string& name, std::size_t d_out, std::size_t d_in, std::size_t rank,
              double alpha, double dropout, Rng& rng);
};

/// bias may be null (no bias term). lora may be null (plain frozen linear).
/// dropout_rng must be supplied when train_mode and lora->dropout > 0.
Var lora_linear(Graph& g, Var x, Param& w, Param* bias, LoraAdapter* lora, bool train_mode,
                Rng* dropout_rng, bool want_grad);

struct DecoderConfig {
  std::size_t width = 64;  // equals the adapter's d_llm
  std::size_t blocks = 2;
  std::size_t ffn_mult = 4;
  std::size_t max_positions = 160;
  std::size_t lora_rank = 8;
  double lora_alpha = 32.0;
  double lora_dropout = 0.1;
};

struct DecoderBlock {
  Param ln1_gain, ln1_bias;
  Param wq, bq, wk, bk, wv, bv, wo, bo;
  Param ln2_gain, ln2_bias;
  Param ffn1_w, ffn1_b, ffn2_w, ffn2_b;
  LoraAdapter lora_q, lora_v;
};

/// Frozen-base causal decoder standing in for the LLM. The embedding table
/// covers target words, BOS/EOS, and the prompt vocabulary; Z frames enter
/// directly as prefix context in the decoder width. Base weights never train;
/// only the q/v low-rank adapters do, and only when enabled.
struct ToyDecoder {
  DecoderConfig cfg;
  Param embed;  // (n_embed_tokens x width), frozen
  Param pos;    // (max_positions x width), frozen
  std::vector<DecoderBlock> blocks;
  Param out_ln_gain, out_ln_bias;
  Param out_w, out_b;  // width -> n_outputs, frozen
  bool lora_enabled = false;

  ToyDecoder() = default;
  ToyDecoder(const DecoderConfig& cfg, std::size_t n_embed_tokens, std::size_t n_outputs,
             Rng& rng);

  std::vector<Param*> base_params();
  std::vector<Param*> lora_params();

  /// Teacher-forced pass: rows are [prompt embeddings; z frames; teacher
  /// embeddings]; returns logits at the teacher positions (n_teacher x
  /// n_outputs).
  Var forward(Graph& g, const std::vector<int>& prompt_ids, Var z,
              const std::vector<int>& teacher_ids, bool train_mode, Rng* dropout_rng,
              bool want_grad);

  /// Greedy generation until eos_class or max_new tokens. Returned ids are
  /// output classes (word ids; eos excluded).
  std::vector<int> generate(const std::vector<int>& prompt_ids, const Array& z_value,
                            int bos_embed_id, int eos_class,
                            const std::vector<int>& class_to_embed, std::size_t max_new);
};

}  // namespace s2st::model
