#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "s2st/conditioning/conditioning.hpp"
#include "s2st/core/grad_check.hpp"
#include "s2st/error.hpp"
#include "support/reference.hpp"

using namespace s2st;
using namespace s2st::cond;
using s2st::ad::Graph;
using s2st::ad::Var;

TEST_CASE("film with zero weights yields zero gamma and beta") {
  Rng rng(1);
  FilmGenerator gen(6, 5, 4, rng);
  gen.w1.value.fill(0.0);
  gen.b1.value.fill(0.0);
  gen.w2.value.fill(0.0);
  gen.b2.value.fill(0.0);
  Graph g;
  FilmParams p = film(g, g.input(Array::randn({1, 6}, rng)), gen);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(p.gamma.value()[i] == 0.0);
    CHECK(p.beta.value()[i] == 0.0);
  }
}

TEST_CASE("film generator emits 2048 parameters for d_h = 1024") {
  Rng rng(2);
  FilmGenerator gen(256, 512, 1024, rng);
  CHECK(gen.w2.value.rows() == 2048);
  Graph g;
  FilmParams p = film(g, g.input(Array::randn({1, 256}, rng, 0.2)), gen);
  CHECK(p.gamma.value().cols() == 1024);
  CHECK(p.beta.value().cols() == 1024);
}

TEST_CASE("film matches the straight-line recomputation") {
  Rng rng(1337);
  FilmGenerator gen(6, 5, 4, rng);
  Array r = Array::randn({1, 6}, rng, 0.5);
  Graph g;
  FilmParams p = film(g, g.input(r), gen);
  std::vector<double> x(r.vec());
  std::vector<double> h = refimpl::affine(gen.w1.value, x, gen.b1.value);
  for (double& v : h) v = refimpl::gelu(v);
  std::vector<double> out = refimpl::affine(gen.w2.value, h, gen.b2.value);
  for (double& v : out) v = std::tanh(v);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(p.gamma.value()[i] == doctest::Approx(out[i]).epsilon(1e-12));
    CHECK(p.beta.value()[i] == doctest::Approx(out[4 + i]).epsilon(1e-12));
  }
}

TEST_CASE("gate with zero weights is sigmoid(-2/1.1) on every frame") {
  Rng rng(3);
  FrameGate fg(4, 6, 5, rng);
  fg.w1.value.fill(0.0);
  fg.b1.value.fill(0.0);
  fg.w2.value.fill(0.0);
  // constructor defaults: final bias -2.0, tau_learn = ln(e-1) so tau = 1.1
  Graph g;
  Var tau = temperature(g, fg);
  CHECK(tau.value().item() == doctest::Approx(1.1).epsilon(1e-12));
  Var gates = gate_series(g, g.input(Array::randn({3, 4}, rng)),
                          g.input(Array::randn({1, 6}, rng)), fg);
  double want = refimpl::sigmoid(-2.0 / 1.1);
  for (std::size_t t = 0; t < 3; ++t)
    CHECK(gates.value()[t] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("temperature floors at 0.1 as tau_learn goes to -inf") {
  Rng rng(4);
  FrameGate fg(4, 6, 5, rng);
  fg.tau_learn.value[0] = -50.0;
  Graph g;
  CHECK(temperature(g, fg).value().item() == 0.1);
}

TEST_CASE("identical frames receive identical gates") {
  Rng rng(5);
  FrameGate fg(4, 6, 5, rng);
  Array h({2, 4});
  for (std::size_t c = 0; c < 4; ++c) {
    h.at(0, c) = 0.3 * static_cast<double>(c);
    h.at(1, c) = 0.3 * static_cast<double>(c);
  }
  Graph g;
  Var gates = gate_series(g, g.input(h), g.input(Array::randn({1, 6}, rng)), fg);
  CHECK(gates.value()[0] == gates.value()[1]);
}

TEST_CASE("distinct frames generically receive distinct gates") {
  Rng rng(6);
  FrameGate fg(4, 6, 5, rng);
  Graph g;
  Var gates = gate_series(g, g.input(Array::randn({5, 4}, rng)),
                          g.input(Array::randn({1, 6}, rng)), fg);
  std::set<double> distinct(gates.value().vec().begin(), gates.value().vec().end());
  CHECK(distinct.size() == 5);
}

TEST_CASE("modulate identities: zero gate and zero film are bitwise no-ops") {
  Rng rng(7);
  Array h = Array::randn({4, 3}, rng);
  Graph g;
  Var vh = g.input(h);
  FilmParams p{g.input(Array::randn({1, 3}, rng, 0.3)), g.input(Array::randn({1, 3}, rng, 0.3))};
  Var zero_gate = g.input(Array({4, 1}));
  CHECK(modulate(g, vh, p, zero_gate).value().vec() == h.vec());

  FilmParams zero_film{g.input(Array({1, 3})), g.input(Array({1, 3}))};
  Var some_gate = g.input(Array::full({4, 1}, 0.77));
  CHECK(modulate(g, vh, zero_film, some_gate).value().vec() == h.vec());
  // input not mutated
  CHECK(vh.value().vec() == h.vec());
}

TEST_CASE("modulate hand example: h=(1,1), gamma=(.5,-.5), beta=(.1,.2), g=1") {
  Graph g;
  Var h = g.input(Array({1, 2}, {1.0, 1.0}));
  FilmParams p{g.input(Array({1, 2}, {0.5, -0.5})), g.input(Array({1, 2}, {0.1, 0.2}))};
  Var gate1 = g.input(Array({1, 1}, {1.0}));
  Var out = modulate(g, h, p, gate1);
  CHECK(out.value()[0] == doctest::Approx(1.6));
  CHECK(out.value()[1] == doctest::Approx(0.7));
}

TEST_CASE("modulate rejects mismatched widths and gate lengths") {
  Graph g;
  Var h = g.input(Array({4, 3}));
  FilmParams p{g.input(Array({1, 2})), g.input(Array({1, 2}))};
  CHECK_THROWS_AS(modulate(g, h, p, g.input(Array({4, 1}))), ShapeError);
  FilmParams ok{g.input(Array({1, 3})), g.input(Array({1, 3}))};
  CHECK_THROWS_AS(modulate(g, h, ok, g.input(Array({3, 1}))), ShapeError);
}

TEST_CASE("static gate: zero logit gives 0.5 everywhere, constant across frames") {
  StaticGate sg;
  Graph g;
  Var gates = static_gate_series(g, 6, sg);
  for (std::size_t t = 0; t < 6; ++t) CHECK(gates.value()[t] == 0.5);
  CHECK(ad::grad_check_param(sg.logit, [&](Graph& gg) {
          return ad::mean(static_gate_series(gg, 6, sg));
        }) < 1e-4);
}

TEST_CASE("ranges: seeded inputs keep g in (0,1) and gamma, beta in (-1,1)") {
  Rng rng(8);
  FilmGenerator gen(6, 5, 4, rng);
  FrameGate fg(4, 6, 5, rng);
  for (int rep = 0; rep < 50; ++rep) {
    Graph g;
    Var r = g.input(Array::randn({1, 6}, rng, 2.0));
    FilmParams p = film(g, r, gen);
    Var gates = gate_series(g, g.input(Array::randn({3, 4}, rng, 2.0)), r, fg);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(p.gamma.value()[i] > -1.0);
      CHECK(p.gamma.value()[i] < 1.0);
      CHECK(p.beta.value()[i] > -1.0);
      CHECK(p.beta.value()[i] < 1.0);
    }
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(gates.value()[t] > 0.0);
      CHECK(gates.value()[t] < 1.0);
    }
  }
}

TEST_CASE("temperature is monotone in tau_learn and flattens the sigmoid") {
  Rng rng(9);
  FrameGate fg(4, 6, 5, rng);
  double prev_tau = 0.0;
  double prev_dev = 1.0;
  const double a = 1.7;  // fixed pre-activation
  for (double tl : {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
    fg.tau_learn.value[0] = tl;
    Graph g;
    double tau = temperature(g, fg).value().item();
    CHECK(tau > prev_tau);
    double dev = std::abs(refimpl::sigmoid(a / tau) - 0.5);
    CHECK(dev < prev_dev);
    prev_tau = tau;
    prev_dev = dev;
  }
}

TEST_CASE("gradients flow through film, gate, tau_learn, and into r_lang") {
  Rng rng(10);
  FilmGenerator gen(6, 5, 4, rng);
  FrameGate fg(4, 6, 5, rng);
  Array h = Array::randn({3, 4}, rng);
  Array r = Array::randn({1, 6}, rng, 0.5);

  auto modulated_mean = [&](Graph& g) {
    Var vr = g.input(r);
    FilmParams p = film(g, vr, gen);
    Var gates = gate_series(g, g.input(h), vr, fg);
    return ad::mean(modulate(g, g.input(h), p, gates));
  };
  CHECK(ad::grad_check_param(gen.w1, modulated_mean) < 1e-4);
  CHECK(ad::grad_check_param(gen.w2, modulated_mean) < 1e-4);
  CHECK(ad::grad_check_param(fg.w1, modulated_mean) < 1e-4);
  CHECK(ad::grad_check_param(fg.w2, modulated_mean) < 1e-4);
  CHECK(ad::grad_check_param(fg.b2, modulated_mean) < 1e-4);
  CHECK(ad::grad_check_param(fg.tau_learn, modulated_mean) < 1e-4);

  // gate output mean w.r.t. tau_learn alone
  CHECK(ad::grad_check_param(fg.tau_learn, [&](Graph& g) {
          return ad::mean(gate_series(g, g.input(h), g.input(r), fg));
        }) < 1e-4);

  // and the full path into r_lang itself
  double err = ad::grad_check(
      [&](Graph& g, Var vr) {
        FilmParams p = film(g, vr, gen);
        Var gates = gate_series(g, g.input(h), vr, fg);
        return ad::mean(modulate(g, g.input(h), p, gates));
      },
      r);
  CHECK(err < 1e-4);
}
