#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "s2st/core/grad_check.hpp"
#include "s2st/error.hpp"
#include "s2st/typology/typology.hpp"
#include "support/reference.hpp"

using namespace s2st;
using namespace s2st::typo;

namespace {

TypologyDims toy_dims() {
  TypologyDims d;
  d.morph = 4;
  d.reorder = 3;
  d.family = 5;
  d.residual = 6;
  d.fused = 8;
  return d;
}

}  // namespace

TEST_CASE("lookup_profile returns the Table-shaped categories") {
  Registry reg = Registry::builtin();
  const auto& fr = reg.lookup("fr");
  CHECK(fr.morphology == Morphology::Fusional);
  CHECK(fr.reordering == Reordering::SvoOriented);
  CHECK(fr.family == Family::Romance);
  const auto& ja = reg.lookup("ja");
  CHECK(ja.morphology == Morphology::Agglutinative);
  CHECK(ja.reordering == Reordering::VerbClauseFinal);
  CHECK(ja.family == Family::Japonic);
  const auto& de = reg.lookup("de");
  CHECK(de.morphology == Morphology::FusionalCompounding);
  CHECK(de.family == Family::Germanic);
  CHECK_THROWS_AS(reg.lookup("xx"), UnknownLanguageError);
}

TEST_CASE("residual indices are unique per language") {
  Registry reg = Registry::builtin();
  for (std::size_t i = 0; i < reg.size(); ++i)
    for (std::size_t j = i + 1; j < reg.size(); ++j)
      CHECK(reg.languages()[i].residual_index != reg.languages()[j].residual_index);
}

TEST_CASE("registry loads from json config and rejects duplicates and junk") {
  Registry reg = Registry::from_json_text(R"([
    {"code":"fr","morphology":"fusional","reordering":"svo_oriented","family":"romance"},
    {"code":"pt","morphology":"fusional","reordering":"svo_oriented","family":"romance"}
  ])");
  CHECK(reg.size() == 2);
  CHECK(reg.lookup("pt").residual_index == 1);
  CHECK_THROWS_AS(Registry::from_json_text(R"([
    {"code":"fr","morphology":"fusional","reordering":"svo_oriented","family":"romance"},
    {"code":"fr","morphology":"fusional","reordering":"svo_oriented","family":"romance"}
  ])"),
                  ConfigError);
  CHECK_THROWS_AS(Registry::from_json_text(R"([{"code":"fr","morphology":"fusional",
    "reordering":"svo_oriented","family":"romance","bogus":1}])"),
                  ConfigError);
}

TEST_CASE("fuse of all-zero embeddings and default affine is the zero vector") {
  Registry reg = Registry::builtin();
  Rng rng(1);
  TypologyTables tables(reg, toy_dims(), rng);
  tables.morph.value.fill(0.0);
  tables.reorder.value.fill(0.0);
  tables.family.value.fill(0.0);
  tables.residual.value.fill(0.0);
  FusionParams fusion(toy_dims().fused, toy_dims().concat_width(), rng);
  fusion.b.value.fill(0.0);
  ad::Graph g;
  ad::Var r = fuse(g, reg.lookup("fr"), tables, fusion);
  for (std::size_t i = 0; i < r.value().size(); ++i)
    CHECK(r.value()[i] == doctest::Approx(0.0));
}

TEST_CASE("fuse maps a 320-wide concat to a 256-wide representation at paper dims") {
  Registry reg = Registry::builtin();
  Rng rng(2);
  TypologyDims d;  // paper defaults: 64+64+64+128 -> 256
  CHECK(d.concat_width() == 320);
  TypologyTables tables(reg, d, rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  ad::Graph g;
  ad::Var r = fuse(g, reg.lookup("de"), tables, fusion);
  CHECK(r.value().rows() == 1);
  CHECK(r.value().cols() == 256);
}

TEST_CASE("fuse matches a straight-line recomputation outside the graph") {
  Registry reg = Registry::builtin();
  Rng rng(1337);
  TypologyDims d = toy_dims();
  TypologyTables tables(reg, d, rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  // make the affine part nontrivial
  fusion.b.value = Array::randn({1, d.fused}, rng, 0.1);
  fusion.ln_gain.value = Array::randn({1, d.fused}, rng, 0.2);
  fusion.ln_bias.value = Array::randn({1, d.fused}, rng, 0.2);

  ad::Graph g;
  const auto& de = reg.lookup("de");
  ad::Var r = fuse(g, de, tables, fusion);

  std::vector<double> cat;
  auto push_row = [&](const Array& t, int row, std::size_t w) {
    for (std::size_t c = 0; c < w; ++c) cat.push_back(t.at(static_cast<std::size_t>(row), c));
  };
  push_row(tables.morph.value, static_cast<int>(de.morphology), d.morph);
  push_row(tables.reorder.value, static_cast<int>(de.reordering), d.reorder);
  push_row(tables.family.value, static_cast<int>(de.family), d.family);
  push_row(tables.residual.value, de.residual_index, d.residual);
  std::vector<double> z = refimpl::affine(fusion.w.value, cat, fusion.b.value);
  std::vector<double> n = refimpl::layer_norm(z, fusion.ln_gain.value, fusion.ln_bias.value);
  for (std::size_t i = 0; i < n.size(); ++i)
    CHECK(r.value()[i] == doctest::Approx(refimpl::gelu(n[i])).epsilon(1e-12));
}

TEST_CASE("shared channels: zero residual makes fr and es bitwise equal, de differs") {
  Registry reg = Registry::builtin();
  Rng rng(7);
  TypologyDims d = toy_dims();
  TypologyTables tables(reg, d, rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  tables.residual.value.fill(0.0);
  auto eval = [&](const char* code) {
    ad::Graph g;
    return fuse(g, reg.lookup(code), tables, fusion).value().vec();
  };
  CHECK(eval("fr") == eval("es"));
  CHECK(eval("fr") != eval("de"));
}

TEST_CASE("distinct residual rows keep fr and es apart") {
  Registry reg = Registry::builtin();
  Rng rng(8);
  TypologyDims d = toy_dims();
  TypologyTables tables(reg, d, rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  auto eval = [&](const char* code) {
    ad::Graph g;
    return fuse(g, reg.lookup(code), tables, fusion).value().vec();
  };
  CHECK(eval("fr") != eval("es"));
}

TEST_CASE("dropping a channel makes fuse ignore it exactly") {
  Registry reg = Registry::builtin();
  Rng rng(9);
  TypologyDims d = toy_dims();
  TypologyTables tables(reg, d, rng);
  tables.drop_channel(Channel::Morph);
  FusionParams fusion(d.fused, tables.active_width(), rng);
  auto eval = [&] {
    ad::Graph g;
    return fuse(g, reg.lookup("ja"), tables, fusion).value().vec();
  };
  auto before = eval();
  tables.morph.value.fill(123.0);  // perturb the zeroed table
  CHECK(eval() == before);
}

TEST_CASE("fuse gradients pass grad_check for every table and the fusion affine") {
  Registry reg = Registry::builtin();
  Rng rng(10);
  TypologyDims d = toy_dims();
  TypologyTables tables(reg, d, rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  auto loss = [&](ad::Graph& g) {
    return ad::mean(ad::mul(fuse(g, reg.lookup("fr"), tables, fusion),
                            g.constant(Array::full({1, d.fused}, 1.3))));
  };
  CHECK(ad::grad_check_param(tables.morph, loss) < 1e-4);
  CHECK(ad::grad_check_param(tables.reorder, loss) < 1e-4);
  CHECK(ad::grad_check_param(tables.family, loss) < 1e-4);
  CHECK(ad::grad_check_param(tables.residual, loss) < 1e-4);
  CHECK(ad::grad_check_param(fusion.w, loss) < 1e-4);
  CHECK(ad::grad_check_param(fusion.b, loss) < 1e-4);
}

TEST_CASE("flat_fuse: zero table gives zero, per-language rows give distinct outputs") {
  Registry reg = Registry::builtin();
  Rng rng(11);
  TypologyDims d = toy_dims();
  FlatTable flat(reg, d.concat_width(), rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  fusion.b.value.fill(0.0);
  {
    FlatTable zero(reg, d.concat_width(), rng);
    zero.table.value.fill(0.0);
    ad::Graph g;
    ad::Var r = flat_fuse(g, "fr", reg, zero, fusion);
    for (std::size_t i = 0; i < r.value().size(); ++i)
      CHECK(r.value()[i] == doctest::Approx(0.0));
  }
  auto eval = [&](const char* code) {
    ad::Graph g;
    return flat_fuse(g, code, reg, flat, fusion).value().vec();
  };
  CHECK(eval("fr") != eval("es"));
  CHECK(eval("fr") != eval("de"));
  CHECK(eval("es") != eval("ja"));
  CHECK_THROWS_AS(eval("xx"), UnknownLanguageError);
}

TEST_CASE("flat_fuse matches the straight-line oracle") {
  Registry reg = Registry::builtin();
  Rng rng(12);
  TypologyDims d = toy_dims();
  FlatTable flat(reg, d.concat_width(), rng);
  FusionParams fusion(d.fused, d.concat_width(), rng);
  ad::Graph g;
  ad::Var r = flat_fuse(g, "es", reg, flat, fusion);
  std::vector<double> e;
  int row = reg.index_of("es");
  for (std::size_t c = 0; c < d.concat_width(); ++c)
    e.push_back(flat.table.value.at(static_cast<std::size_t>(row), c));
  std::vector<double> z = refimpl::affine(fusion.w.value, e, fusion.b.value);
  std::vector<double> n = refimpl::layer_norm(z, fusion.ln_gain.value, fusion.ln_bias.value);
  for (std::size_t i = 0; i < n.size(); ++i)
    CHECK(r.value()[i] == doctest::Approx(refimpl::gelu(n[i])).epsilon(1e-12));
}
