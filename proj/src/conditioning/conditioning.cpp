#include "s2st/conditioning/conditioning.hpp"

#include <cmath>

#include "s2st/error.hpp"

namespace s2st::cond {

using namespace s2st::ad;

namespace {
// 1/sqrt(fan_in) keeps the toy MLPs in a sane range at init.
Array init_linear(std::size_t out, std::size_t in, Rng& rng) {
  return Array::randn({out, in}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}
}  // namespace

FilmGenerator::FilmGenerator(std::size_t lang_dim, std::size_t hidden, std::size_t dh, Rng& rng)
    : w1("film.w1", init_linear(hidden, lang_dim, rng)),
      b1("film.b1", Array({1, hidden})),
      w2("film.w2", init_linear(2 * dh, hidden, rng)),
      b2("film.b2", Array({1, 2 * dh})),
      d_h(dh) {}

FilmParams film(Graph& g, Var r_lang, FilmGenerator& gen, bool want_grad) {
  require_shape(gen.w2.value.rows() == 2 * gen.d_h,
                "film generator output width must be 2*d_h");
  Var h = gelu(linear(r_lang, g.use(gen.w1, want_grad), g.use(gen.b1, want_grad)));
  Var out = s2st::ad::tanh(linear(h, g.use(gen.w2, want_grad), g.use(gen.b2, want_grad)));
  auto halves = split_cols(out, {gen.d_h, gen.d_h});
  return FilmParams{halves[0], halves[1]};
}

FrameGate::FrameGate(std::size_t d_h, std::size_t lang_dim, std::size_t hidden, Rng& rng)
    : w1("gate.w1", init_linear(hidden, d_h + lang_dim, rng)),
      b1("gate.b1", Array({1, hidden})),
      w2("gate.w2", init_linear(1, hidden, rng)),
      b2("gate.b2", Array::scalar(kInitialFinalBias)),
      tau_learn("gate.tau_learn", Array::scalar(std::log(std::exp(1.0) - 1.0))) {}

Var temperature(Graph& g, FrameGate& fg, bool want_grad) {
  return add_const(softplus(g.use(fg.tau_learn, want_grad)), FrameGate::kEps);
}

Var gate_series(Graph& g, Var h, Var r_lang, FrameGate& fg, bool want_grad) {
  const std::size_t frames = h.value().rows();
  Var r_rep = repeat_rows(r_lang, frames);
  Var x = concat({h, r_rep}, 1);
  Var z = gelu(linear(x, g.use(fg.w1, want_grad), g.use(fg.b1, want_grad)));
  Var pre = linear(z, g.use(fg.w2, want_grad), g.use(fg.b2, want_grad));  // T x 1
  Var tau = temperature(g, fg, want_grad);
  return sigmoid(mul_scalarvar(pre, recip(tau)));
}

Var static_gate_series(Graph& g, std::size_t frames, StaticGate& sg, bool want_grad) {
  Var v = sigmoid(g.use(sg.logit, want_grad));
  return repeat_rows(v, frames);
}

Var modulate(Graph& g, Var h, const FilmParams& p, Var gates) {
  const std::size_t frames = h.value().rows();
  const std::size_t width = h.value().cols();
  require_shape(p.gamma.value().cols() == width && p.beta.value().cols() == width,
                "modulate: film width " + std::to_string(p.gamma.value().cols()) +
                    " vs features " + std::to_string(width));
  require_shape(gates.value().rows() == frames && gates.value().cols() == 1,
                "modulate: gate series " + shape_str(gates.value()) + " for " +
                    std::to_string(frames) + " frames");
  (void)g;
  Var gated_gamma = matmul(gates, p.gamma);  // outer product, T x d_h
  Var gated_beta = matmul(gates, p.beta);
  return add(add(h, mul(gated_gamma, h)), gated_beta);
}

}  // namespace s2st::cond
