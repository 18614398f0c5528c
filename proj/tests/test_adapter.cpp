#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "s2st/adapter/adapter.hpp"
#include "s2st/core/grad_check.hpp"
#include "s2st/error.hpp"

using namespace s2st;
using namespace s2st::adapter;

namespace {

AdapterConfig toy_cfg() {
  AdapterConfig cfg;
  cfg.d_in = 16;
  cfg.d_h = 8;
  cfg.d_llm = 12;
  cfg.kernel = 7;
  return cfg;
}

}  // namespace

TEST_CASE("stride-2 output lengths are ceil(T/2)") {
  Rng rng(1);
  AdapterConfig cfg = toy_cfg();
  AdapterParams p(cfg, rng);
  for (auto [t, want] : {std::pair<std::size_t, std::size_t>{10, 5}, {7, 4}, {1, 1}, {4, 2}}) {
    ad::Graph g;
    AdapterOut out = adapter_forward(g, g.input(Array::randn({t, cfg.d_in}, rng)), t, p, cfg);
    CHECK(out.valid == want);
    CHECK(out.h_down.value().rows() == want);
  }
}

TEST_CASE("toy config shapes: d_in=16, d_h=8, d_llm=12, T=4") {
  Rng rng(2);
  AdapterConfig cfg = toy_cfg();
  AdapterParams p(cfg, rng);
  ad::Graph g;
  AdapterOut out = adapter_forward(g, g.input(Array::randn({4, 16}, rng)), 4, p, cfg);
  CHECK(out.h_down.value().rows() == 2);
  CHECK(out.h_down.value().cols() == 8);
  CHECK(out.z.value().rows() == 2);
  CHECK(out.z.value().cols() == 12);
}

TEST_CASE("paper-default widths run 1280 -> 1024 -> 3584") {
  Rng rng(3);
  AdapterConfig cfg;  // defaults
  CHECK(cfg.d_in == 1280);
  CHECK(cfg.d_h == 1024);
  CHECK(cfg.d_llm == 3584);
  AdapterParams p(cfg, rng);
  ad::Graph g;
  AdapterOut out = adapter_forward(g, g.input(Array::randn({3, 1280}, rng)), 3, p, cfg,
                                   /*want_grad=*/false);
  CHECK(out.h_down.value().cols() == 1024);
  CHECK(out.z.value().cols() == 3584);
  CHECK(out.valid == 2);
}

TEST_CASE("config invariants: even kernel and zero stride are rejected") {
  AdapterConfig cfg = toy_cfg();
  cfg.kernel = 6;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.kernel = 7;
  cfg.stride = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("width mismatch raises a dimension error") {
  Rng rng(4);
  AdapterConfig cfg = toy_cfg();
  AdapterParams p(cfg, rng);
  ad::Graph g;
  CHECK_THROWS_AS(adapter_forward(g, g.input(Array::randn({4, 5}, rng)), 4, p, cfg), ShapeError);
}

TEST_CASE("zero-padding an item to a longer buffer leaves valid outputs unchanged") {
  Rng rng(5);
  AdapterConfig cfg = toy_cfg();
  AdapterParams p(cfg, rng);
  const std::size_t valid = 5;
  Array x = Array::randn({valid, cfg.d_in}, rng);
  Array xpad({valid + 4, cfg.d_in});
  for (std::size_t r = 0; r < valid; ++r)
    for (std::size_t c = 0; c < cfg.d_in; ++c) xpad.at(r, c) = x.at(r, c);

  ad::Graph g1, g2;
  AdapterOut a = adapter_forward(g1, g1.input(x), valid, p, cfg);
  AdapterOut b = adapter_forward(g2, g2.input(xpad), valid, p, cfg);
  CHECK(a.valid == b.valid);
  for (std::size_t r = 0; r < a.valid; ++r)
    for (std::size_t c = 0; c < cfg.d_h; ++c) {
      CHECK(a.h_down.value().at(r, c) == b.h_down.value().at(r, c));
    }
  for (std::size_t r = 0; r < a.valid; ++r)
    for (std::size_t c = 0; c < cfg.d_llm; ++c) {
      CHECK(a.z.value().at(r, c) == b.z.value().at(r, c));
    }
  // padding rows of the outputs stay zero
  for (std::size_t r = b.valid; r < b.h_down.value().rows(); ++r)
    for (std::size_t c = 0; c < cfg.d_h; ++c) CHECK(b.h_down.value().at(r, c) == 0.0);
}

TEST_CASE("gradients pass through the full adapter at toy sizes") {
  Rng rng(6);
  AdapterConfig cfg = toy_cfg();
  cfg.d_in = 5;
  cfg.d_h = 4;
  cfg.d_llm = 3;
  cfg.kernel = 3;
  AdapterParams p(cfg, rng);
  Array x = Array::randn({4, cfg.d_in}, rng);
  auto loss = [&](ad::Graph& g) {
    AdapterOut out = adapter_forward(g, g.input(x), 4, p, cfg);
    return ad::add(ad::mean(out.z), ad::mean(out.h_down));
  };
  CHECK(ad::grad_check_param(p.in_w, loss) < 1e-4);
  CHECK(ad::grad_check_param(p.conv[0].dw_kernel, loss) < 1e-4);
  CHECK(ad::grad_check_param(p.conv[1].pw_w, loss) < 1e-4);
  CHECK(ad::grad_check_param(p.attn[0].wq, loss) < 1e-4);
  CHECK(ad::grad_check_param(p.attn[1].wv, loss) < 1e-4);
  CHECK(ad::grad_check_param(p.out_w, loss) < 1e-4);
  // and w.r.t. the input features
  double err = ad::grad_check(
      [&](ad::Graph& g, ad::Var v) {
        AdapterOut out = adapter_forward(g, v, 4, p, cfg);
        return ad::mean(out.z);
      },
      x);
  CHECK(err < 1e-4);
}

TEST_CASE("encoder stand-in is deterministic, frozen, and length-doubling") {
  EncoderStandin enc(10, 6, 99);
  std::vector<int> tokens{1, 4, 7};
  Array a = enc.encode(tokens, 0.05, 1234);
  Array b = enc.encode(tokens, 0.05, 1234);
  CHECK(a.vec() == b.vec());
  CHECK(a.rows() == 6);  // 2L
  CHECK(a.cols() == 6);
  Array c = enc.encode(tokens, 0.05, 1235);  // different utterance seed
  CHECK(a.vec() != c.vec());
  CHECK_FALSE(enc.table().trainable);
  CHECK_THROWS_AS(enc.encode({11}, 0.0, 1), VocabularyError);
  // zero noise reproduces the table rows exactly, twice each
  Array d = enc.encode({3}, 0.0, 7);
  for (std::size_t c2 = 0; c2 < 6; ++c2) {
    CHECK(d.at(0, c2) == enc.table().value.at(3, c2));
    CHECK(d.at(1, c2) == enc.table().value.at(3, c2));
  }
}
