#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "s2st/core/graph.hpp"
#include "s2st/core/ops.hpp"
#include "s2st/core/rng.hpp"

namespace s2st::adapter {

using s2st::ad::Graph;
using s2st::ad::Param;
using s2st::ad::Var;

struct AdapterConfig {
  std::size_t d_in = 1280;
  std::size_t d_h = 1024;
  std::size_t kernel = 7;
  std::size_t stride = 2;
  std::size_t conv_blocks = 2;
  std::size_t attn_blocks = 2;
  std::size_t d_llm = 3584;

  void validate() const;  // kernel odd, stride >= 1
};

/// Batch of (frames x width) feature buffers with per-item valid lengths.
/// Frames at or beyond the valid length are zero and never influence valid
/// outputs or losses.
struct FeatureSequence {
  std::vector<Array> items;
  std::vector<std::size_t> valid;
};

struct ConvBlock {
  Param ln_gain, ln_bias;
  Param dw_kernel, dw_bias;  // depthwise (d_h x K), (1 x d_h)
  Param pw_w, pw_b;          // pointwise d_h -> d_h
};

struct AttnBlock {
  Param ln_gain, ln_bias;
  Param wq, bq, wk, bk, wv, bv, wo, bo;
};

struct AdapterParams {
  Param in_w, in_b;    // d_in -> d_h
  std::vector<ConvBlock> conv;
  std::vector<AttnBlock> attn;
  Param out_w, out_b;  // d_h -> d_llm

  AdapterParams() = default;
  AdapterParams(const AdapterConfig& cfg, Rng& rng);
  std::vector<Param*> params();
};

struct AdapterOut {
  Var h_down;  // T' x d_h, T' = ceil(valid / stride) valid rows
  Var z;       // T' x d_llm
  std::size_t valid;
};

/// Projection -> conv blocks (pre-norm, residual) -> stride subsample ->
/// attention blocks (pre-norm, residual, length-masked) -> H_down; Z is the
/// final linear projection of H_down. x may have padding rows beyond `valid`.
AdapterOut adapter_forward(Graph& g, Var x, std::size_t valid, AdapterParams& p,
                           const AdapterConfig& cfg, bool want_grad = true);

/// Stand-in for the frozen speech encoder: a fixed random embedding per source
/// token, repeated twice in time, plus seeded additive noise. Parameters are
/// created frozen and never change.
class EncoderStandin {
 public:
  EncoderStandin() = default;
  EncoderStandin(std::size_t vocab, std::size_t d_in, std::uint64_t seed);

  /// tokens are source-vocabulary ids; noise is deterministic in
  /// (construction seed, utt_seed). Output is (2L x d_in).
  Array encode(const std::vector<int>& tokens, double noise_level,
               std::uint64_t utt_seed) const;

  std::size_t vocab() const { return table_.value.rows(); }
  std::size_t width() const { return d_in_; }
  Param& table() { return table_; }

 private:
  Param table_;  // (vocab x d_in), trainable = false
  std::size_t d_in_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace s2st::adapter
