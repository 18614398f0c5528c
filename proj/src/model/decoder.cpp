#include "s2st/model/decoder.hpp"

#include <cmath>

#include "s2st/error.hpp"

namespace s2st::model {

using namespace s2st::ad;

LoraAdapter::LoraAdapter(const std::string& name, std::size_t d_out, std::size_t d_in,
                         std::size_t r, double al, double drop, Rng& rng)
    : a(name + ".a", Array::randn({r, d_in}, rng, 1.0 / std::sqrt(static_cast<double>(d_in)))),
      b(name + ".b", Array({d_out, r})),  // zero: adapter starts as a no-op
      rank(r),
      alpha(al),
      dropout(drop) {}

Var lora_linear(Graph& g, Var x, Param& w, Param* bias, LoraAdapter* lora, bool train_mode,
                Rng* dropout_rng, bool want_grad) {
  require_shape(x.value().cols() == w.value.cols(),
                "lora_linear: x " + shape_str(x.value()) + " vs w " + shape_str(w.value));
  Var base;
  if (bias) {
    base = linear(x, g.use(w, want_grad), g.use(*bias, want_grad));
  } else {
    base = matmul_nt(x, g.use(w, want_grad));
  }
  if (!lora) return base;
  require_shape(lora->a.value.cols() == x.value().cols() &&
                    lora->b.value.rows() == w.value.rows() &&
                    lora->a.value.rows() == lora->rank &&
                    lora->b.value.cols() == lora->rank,
                "lora_linear: adapter ranks do not match the base projection");
  Var xin = x;
  if (train_mode && lora->dropout > 0.0) {
    if (!dropout_rng) throw Error("lora_linear: dropout requires an rng in training mode");
    Array mask(x.value().shape());
    const double keep = 1.0 - lora->dropout;
    for (std::size_t i = 0; i < mask.size(); ++i)
      mask[i] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
    xin = mul(x, g.constant(mask));
  }
  Var down = matmul_nt(xin, g.use(lora->a, want_grad));  // (T x r)
  Var up = matmul_nt(down, g.use(lora->b, want_grad));   // (T x d_out)
  return add(base, scale(up, lora->alpha / static_cast<double>(lora->rank)));
}

namespace {
Array init_linear(std::size_t out, std::size_t in, Rng& rng) {
  return Array::randn({out, in}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}
}  // namespace

ToyDecoder::ToyDecoder(const DecoderConfig& c, std::size_t n_embed_tokens,
                       std::size_t n_outputs, Rng& rng)
    : cfg(c) {
  const std::size_t w = cfg.width;
  embed = Param("decoder.embed", Array::randn({n_embed_tokens, w}, rng, 1.0), false);
  pos = Param("decoder.pos", Array::randn({cfg.max_positions, w}, rng, 0.5), false);
  for (std::size_t i = 0; i < cfg.blocks; ++i) {
    std::string pre = "decoder.block" + std::to_string(i) + ".";
    DecoderBlock b;
    b.ln1_gain = Param(pre + "ln1_gain", Array::full({1, w}, 1.0), false);
    b.ln1_bias = Param(pre + "ln1_bias", Array({1, w}), false);
    b.wq = Param(pre + "wq", init_linear(w, w, rng), false);
    b.bq = Param(pre + "bq", Array({1, w}), false);
    b.wk = Param(pre + "wk", init_linear(w, w, rng), false);
    b.bk = Param(pre + "bk", Array({1, w}), false);
    b.wv = Param(pre + "wv", init_linear(w, w, rng), false);
    b.bv = Param(pre + "bv", Array({1, w}), false);
    b.wo = Param(pre + "wo", init_linear(w, w, rng), false);
    b.bo = Param(pre + "bo", Array({1, w}), false);
    b.ln2_gain = Param(pre + "ln2_gain", Array::full({1, w}, 1.0), false);
    b.ln2_bias = Param(pre + "ln2_bias", Array({1, w}), false);
    b.ffn1_w = Param(pre + "ffn1_w", init_linear(w * cfg.ffn_mult, w, rng), false);
    b.ffn1_b = Param(pre + "ffn1_b", Array({1, w * cfg.ffn_mult}), false);
    b.ffn2_w = Param(pre + "ffn2_w", init_linear(w, w * cfg.ffn_mult, rng), false);
    b.ffn2_b = Param(pre + "ffn2_b", Array({1, w}), false);
    b.lora_q = LoraAdapter(pre + "lora_q", w, w, cfg.lora_rank, cfg.lora_alpha,
                           cfg.lora_dropout, rng);
    b.lora_v = LoraAdapter(pre + "lora_v", w, w, cfg.lora_rank, cfg.lora_alpha,
                           cfg.lora_dropout, rng);
    blocks.push_back(std::move(b));
  }
  out_ln_gain = Param("decoder.out_ln_gain", Array::full({1, w}, 1.0), false);
  out_ln_bias = Param("decoder.out_ln_bias", Array({1, w}), false);
  out_w = Param("decoder.out_w", init_linear(n_outputs, w, rng), false);
  out_b = Param("decoder.out_b", Array({1, n_outputs}), false);
}

std::vector<Param*> ToyDecoder::base_params() {
  std::vector<Param*> out{&embed, &pos};
  for (auto& b : blocks)
    for (Param* p : {&b.ln1_gain, &b.ln1_bias, &b.wq, &b.bq, &b.wk, &b.bk, &b.wv, &b.bv,
                     &b.wo, &b.bo, &b.ln2_gain, &b.ln2_bias, &b.ffn1_w, &b.ffn1_b, &b.ffn2_w,
                     &b.ffn2_b})
      out.push_back(p);
  out.push_back(&out_ln_gain);
  out.push_back(&out_ln_bias);
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

std::vector<Param*> ToyDecoder::lora_params() {
  std::vector<Param*> out;
  for (auto& b : blocks) {
    out.push_back(&b.lora_q.a);
    out.push_back(&b.lora_q.b);
    out.push_back(&b.lora_v.a);
    out.push_back(&b.lora_v.b);
  }
  return out;
}

namespace {
Array causal_bias(std::size_t n) {
  Array b({n, n});
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t k = q + 1; k < n; ++k) b.at(q, k) = -1e30;
  return b;
}
}  // namespace

Var ToyDecoder::forward(Graph& g, const std::vector<int>& prompt_ids, Var z,
                        const std::vector<int>& teacher_ids, bool train_mode, Rng* dropout_rng,
                        bool want_grad) {
  require_shape(z.value().cols() == cfg.width,
                "decoder: z width " + std::to_string(z.value().cols()) + " vs decoder width " +
                    std::to_string(cfg.width));
  const std::size_t n_prefix = prompt_ids.size() + z.value().rows();
  const std::size_t n = n_prefix + teacher_ids.size();
  if (n > cfg.max_positions)
    throw ConfigError("decoder: sequence length " + std::to_string(n) +
                      " exceeds max_positions " + std::to_string(cfg.max_positions));

  std::vector<Var> rows;
  if (!prompt_ids.empty()) rows.push_back(embedding(g.use(embed, false), prompt_ids));
  rows.push_back(z);
  if (!teacher_ids.empty()) rows.push_back(embedding(g.use(embed, false), teacher_ids));
  Var x = rows.size() == 1 ? rows[0] : concat(rows, 0);
  x = add(x, slice_rows(g.use(pos, false), 0, n));

  Array bias = causal_bias(n);
  for (auto& b : blocks) {
    Var u = layer_norm(x, g.use(b.ln1_gain, false), g.use(b.ln1_bias, false));
    Var q = lora_linear(g, u, b.wq, &b.bq, lora_enabled ? &b.lora_q : nullptr, train_mode,
                        dropout_rng, want_grad);
    Var k = linear(u, g.use(b.wk, false), g.use(b.bk, false));
    Var v = lora_linear(g, u, b.wv, &b.bv, lora_enabled ? &b.lora_v : nullptr, train_mode,
                        dropout_rng, want_grad);
    Var a = attention(q, k, v, bias);
    x = add(x, linear(a, g.use(b.wo, false), g.use(b.bo, false)));
    Var u2 = layer_norm(x, g.use(b.ln2_gain, false), g.use(b.ln2_bias, false));
    Var f = linear(gelu(linear(u2, g.use(b.ffn1_w, false), g.use(b.ffn1_b, false))),
                   g.use(b.ffn2_w, false), g.use(b.ffn2_b, false));
    x = add(x, f);
  }
  Var h = layer_norm(slice_rows(x, n_prefix, n), g.use(out_ln_gain, false),
                     g.use(out_ln_bias, false));
  return linear(h, g.use(out_w, false), g.use(out_b, false));
}

std::vector<int> ToyDecoder::generate(const std::vector<int>& prompt_ids, const Array& z_value,
                                      int bos_embed_id, int eos_class,
                                      const std::vector<int>& class_to_embed,
                                      std::size_t max_new) {
  std::vector<int> out;
  std::vector<int> teacher{bos_embed_id};
  for (std::size_t step = 0; step < max_new; ++step) {
    Graph g;
    Var logits = forward(g, prompt_ids, g.constant(z_value), teacher,
                         /*train_mode=*/false, nullptr, /*want_grad=*/false);
    const Array& lv = logits.value();
    const std::size_t last = lv.rows() - 1;
    int best = 0;
    for (std::size_t c = 1; c < lv.cols(); ++c)
      if (lv.at(last, c) > lv.at(last, static_cast<std::size_t>(best)))
        best = static_cast<int>(c);
    if (best == eos_class) break;
    out.push_back(best);
    teacher.push_back(class_to_embed[static_cast<std::size_t>(best)]);
  }
  return out;
}

}  // namespace s2st::model
