#include "s2st/adapter/adapter.hpp"

#include <cmath>

#include "s2st/error.hpp"

namespace s2st::adapter {

using namespace s2st::ad;

void AdapterConfig::validate() const {
  if (kernel % 2 == 0)
    throw ConfigError("adapter kernel must be odd, got " + std::to_string(kernel));
  if (stride < 1) throw ConfigError("adapter stride must be >= 1");
  if (d_in == 0 || d_h == 0 || d_llm == 0) throw ConfigError("adapter widths must be nonzero");
}

namespace {

Array init_linear(std::size_t out, std::size_t in, Rng& rng) {
  return Array::randn({out, in}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

// 1/0 row mask as a full T x width constant.
Array row_mask(std::size_t t, std::size_t valid, std::size_t width) {
  Array m({t, width});
  for (std::size_t r = 0; r < valid && r < t; ++r)
    for (std::size_t c = 0; c < width; ++c) m.at(r, c) = 1.0;
  return m;
}

// Additive score bias masking padded key positions.
Array attn_bias(std::size_t t, std::size_t valid) {
  Array b({t, t});
  for (std::size_t q = 0; q < t; ++q)
    for (std::size_t k = 0; k < t; ++k)
      if (k >= valid) b.at(q, k) = -1e30;
  return b;
}

}  // namespace

AdapterParams::AdapterParams(const AdapterConfig& cfg, Rng& rng) {
  cfg.validate();
  in_w = Param("adapter.in_w", init_linear(cfg.d_h, cfg.d_in, rng));
  in_b = Param("adapter.in_b", Array({1, cfg.d_h}));
  for (std::size_t i = 0; i < cfg.conv_blocks; ++i) {
    std::string pre = "adapter.conv" + std::to_string(i) + ".";
    ConvBlock b;
    b.ln_gain = Param(pre + "ln_gain", Array::full({1, cfg.d_h}, 1.0));
    b.ln_bias = Param(pre + "ln_bias", Array({1, cfg.d_h}));
    b.dw_kernel = Param(pre + "dw_kernel",
                        Array::randn({cfg.d_h, cfg.kernel}, rng,
                                     1.0 / std::sqrt(static_cast<double>(cfg.kernel))));
    b.dw_bias = Param(pre + "dw_bias", Array({1, cfg.d_h}));
    b.pw_w = Param(pre + "pw_w", init_linear(cfg.d_h, cfg.d_h, rng));
    b.pw_b = Param(pre + "pw_b", Array({1, cfg.d_h}));
    conv.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < cfg.attn_blocks; ++i) {
    std::string pre = "adapter.attn" + std::to_string(i) + ".";
    AttnBlock b;
    b.ln_gain = Param(pre + "ln_gain", Array::full({1, cfg.d_h}, 1.0));
    b.ln_bias = Param(pre + "ln_bias", Array({1, cfg.d_h}));
    b.wq = Param(pre + "wq", init_linear(cfg.d_h, cfg.d_h, rng));
    b.bq = Param(pre + "bq", Array({1, cfg.d_h}));
    b.wk = Param(pre + "wk", init_linear(cfg.d_h, cfg.d_h, rng));
    b.bk = Param(pre + "bk", Array({1, cfg.d_h}));
    b.wv = Param(pre + "wv", init_linear(cfg.d_h, cfg.d_h, rng));
    b.bv = Param(pre + "bv", Array({1, cfg.d_h}));
    b.wo = Param(pre + "wo", init_linear(cfg.d_h, cfg.d_h, rng));
    b.bo = Param(pre + "bo", Array({1, cfg.d_h}));
    attn.push_back(std::move(b));
  }
  out_w = Param("adapter.out_w", init_linear(cfg.d_llm, cfg.d_h, rng));
  out_b = Param("adapter.out_b", Array({1, cfg.d_llm}));
}

std::vector<Param*> AdapterParams::params() {
  std::vector<Param*> out{&in_w, &in_b};
  for (auto& b : conv) {
    out.push_back(&b.ln_gain);
    out.push_back(&b.ln_bias);
    out.push_back(&b.dw_kernel);
    out.push_back(&b.dw_bias);
    out.push_back(&b.pw_w);
    out.push_back(&b.pw_b);
  }
  for (auto& b : attn) {
    out.push_back(&b.ln_gain);
    out.push_back(&b.ln_bias);
    out.push_back(&b.wq);
    out.push_back(&b.bq);
    out.push_back(&b.wk);
    out.push_back(&b.bk);
    out.push_back(&b.wv);
    out.push_back(&b.bv);
    out.push_back(&b.wo);
    out.push_back(&b.bo);
  }
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

AdapterOut adapter_forward(Graph& g, Var x, std::size_t valid, AdapterParams& p,
                           const AdapterConfig& cfg, bool want_grad) {
  cfg.validate();
  require_shape(x.value().cols() == cfg.d_in,
                "adapter input width " + std::to_string(x.value().cols()) + " vs d_in " +
                    std::to_string(cfg.d_in));
  require_shape(valid <= x.value().rows(), "adapter valid length exceeds buffer");
  const std::size_t t = x.value().rows();

  // Padding rows are re-zeroed after every biased sublayer so they never leak
  // into depthwise windows or attention values.
  Var mask = g.constant(row_mask(t, valid, cfg.d_h));
  Var h = mul(linear(mul(x, g.constant(row_mask(t, valid, cfg.d_in))),
                     g.use(p.in_w, want_grad), g.use(p.in_b, want_grad)),
              mask);
  for (auto& b : p.conv) {
    Var u = mul(layer_norm(h, g.use(b.ln_gain, want_grad), g.use(b.ln_bias, want_grad)), mask);
    u = conv1d_depthwise(u, g.use(b.dw_kernel, want_grad), g.use(b.dw_bias, want_grad));
    u = gelu(linear(u, g.use(b.pw_w, want_grad), g.use(b.pw_b, want_grad)));
    h = mul(add(h, u), mask);
  }

  h = subsample(h, cfg.stride);
  const std::size_t t2 = h.value().rows();
  const std::size_t valid2 = (valid + cfg.stride - 1) / cfg.stride;
  Var mask2 = g.constant(row_mask(t2, valid2, cfg.d_h));
  h = mul(h, mask2);
  Array bias2 = attn_bias(t2, valid2);
  for (auto& b : p.attn) {
    Var u = mul(layer_norm(h, g.use(b.ln_gain, want_grad), g.use(b.ln_bias, want_grad)), mask2);
    Var q = linear(u, g.use(b.wq, want_grad), g.use(b.bq, want_grad));
    Var k = linear(u, g.use(b.wk, want_grad), g.use(b.bk, want_grad));
    Var v = linear(u, g.use(b.wv, want_grad), g.use(b.bv, want_grad));
    Var a = attention(q, k, v, bias2);
    Var o = linear(a, g.use(b.wo, want_grad), g.use(b.bo, want_grad));
    h = mul(add(h, o), mask2);
  }

  Var z = mul(linear(h, g.use(p.out_w, want_grad), g.use(p.out_b, want_grad)),
              g.constant(row_mask(t2, valid2, cfg.d_llm)));
  return AdapterOut{h, z, valid2};
}

EncoderStandin::EncoderStandin(std::size_t vocab, std::size_t d_in, std::uint64_t seed)
    : d_in_(d_in), seed_(seed) {
  Rng rng(hash_mix(seed, hash_str("encoder_standin")));
  table_ = Param("standin.table", Array::randn({vocab, d_in}, rng, 1.0), /*trainable=*/false);
}

Array EncoderStandin::encode(const std::vector<int>& tokens, double noise_level,
                             std::uint64_t utt_seed) const {
  for (int tok : tokens)
    if (tok < 0 || static_cast<std::size_t>(tok) >= table_.value.rows())
      throw VocabularyError("encoder stand-in: token id " + std::to_string(tok) +
                            " outside vocabulary of size " + std::to_string(table_.value.rows()));
  Rng noise(hash_mix(seed_, utt_seed));
  Array out({tokens.size() * 2, d_in_});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::size_t row = static_cast<std::size_t>(tokens[i]);
    for (std::size_t rep = 0; rep < 2; ++rep)
      for (std::size_t c = 0; c < d_in_; ++c)
        out.at(2 * i + rep, c) = table_.value.at(row, c) + noise_level * noise.normal();
  }
  return out;
}

}  // namespace s2st::adapter
