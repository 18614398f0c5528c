#pragma once

#include <cstddef>

#include "s2st/core/graph.hpp"
#include "s2st/core/ops.hpp"
#include "s2st/core/rng.hpp"

namespace s2st::cond {

using s2st::ad::Graph;
using s2st::ad::Param;
using s2st::ad::Var;

/// Two-layer MLP mapping the language representation to 2*d_h affine
/// parameters, tanh-bounded and split into gamma/beta halves.
struct FilmGenerator {
  Param w1, b1, w2, b2;
  std::size_t d_h = 0;

  FilmGenerator() = default;
  FilmGenerator(std::size_t lang_dim, std::size_t hidden, std::size_t d_h, Rng& rng);
};

struct FilmParams {
  Var gamma;  // 1 x d_h, entries in (-1, 1)
  Var beta;   // 1 x d_h
};

FilmParams film(Graph& g, Var r_lang, FilmGenerator& gen, bool want_grad = true);

/// Per-frame gate over [h_t; r_lang] with temperature
/// tau = softplus(tau_learn) + 0.1. The final-layer bias starts at -2.0 and
/// tau_learn at ln(e-1) so modulation is weak and tau ~= 1.1 initially.
struct FrameGate {
  Param w1, b1, w2, b2;
  Param tau_learn;  // 1x1 scalar
  static constexpr double kEps = 0.1;
  static constexpr double kInitialFinalBias = -2.0;

  FrameGate() = default;
  FrameGate(std::size_t d_h, std::size_t lang_dim, std::size_t hidden, Rng& rng);
};

Var temperature(Graph& g, FrameGate& fg, bool want_grad = true);  // 1x1, >= 0.1

/// g_t for every frame of h (T x d_h); returns T x 1, entries in (0, 1).
Var gate_series(Graph& g, Var h, Var r_lang, FrameGate& fg, bool want_grad = true);

/// Static scalar gate variant: one learnable logit through a sigmoid, shared
/// across frames and utterances.
struct StaticGate {
  Param logit;  // 1x1
  StaticGate() : logit("static_gate.logit", Array::scalar(0.0)) {}
};

Var static_gate_series(Graph& g, std::size_t frames, StaticGate& sg, bool want_grad = true);

/// h~ = (1 + g_t * gamma) (.) h_t + g_t * beta; h is not mutated.
Var modulate(Graph& g, Var h, const FilmParams& p, Var gates);

}  // namespace s2st::cond
