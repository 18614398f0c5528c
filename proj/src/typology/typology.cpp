#include "s2st/typology/typology.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "s2st/error.hpp"

namespace s2st::typo {

using nlohmann::json;

Morphology parse_morphology(const std::string& s) {
  if (s == "fusional") return Morphology::Fusional;
  if (s == "fusional_compounding") return Morphology::FusionalCompounding;
  if (s == "agglutinative") return Morphology::Agglutinative;
  throw ConfigError("unknown morphology category: " + s);
}

Reordering parse_reordering(const std::string& s) {
  if (s == "svo_oriented") return Reordering::SvoOriented;
  if (s == "verb_clause_final") return Reordering::VerbClauseFinal;
  throw ConfigError("unknown reordering category: " + s);
}

Family parse_family(const std::string& s) {
  if (s == "romance") return Family::Romance;
  if (s == "germanic") return Family::Germanic;
  if (s == "japonic") return Family::Japonic;
  throw ConfigError("unknown family: " + s);
}

std::string to_string(Morphology m) {
  switch (m) {
    case Morphology::Fusional: return "fusional";
    case Morphology::FusionalCompounding: return "fusional_compounding";
    case Morphology::Agglutinative: return "agglutinative";
  }
  return "?";
}

std::string to_string(Reordering r) {
  return r == Reordering::SvoOriented ? "svo_oriented" : "verb_clause_final";
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Romance: return "romance";
    case Family::Germanic: return "germanic";
    case Family::Japonic: return "japonic";
  }
  return "?";
}

Channel parse_channel(const std::string& s) {
  if (s == "morph") return Channel::Morph;
  if (s == "reorder") return Channel::Reorder;
  if (s == "family") return Channel::Family;
  if (s == "residual") return Channel::Residual;
  throw ConfigError("unknown typology channel: " + s);
}

Registry Registry::builtin() {
  Registry r;
  r.add("fr", Morphology::Fusional, Reordering::SvoOriented, Family::Romance);
  r.add("es", Morphology::Fusional, Reordering::SvoOriented, Family::Romance);
  r.add("de", Morphology::FusionalCompounding, Reordering::VerbClauseFinal, Family::Germanic);
  r.add("ja", Morphology::Agglutinative, Reordering::VerbClauseFinal, Family::Japonic);
  return r;
}

void Registry::add(const std::string& code, Morphology m, Reordering ro, Family f) {
  for (const auto& row : rows_)
    if (row.code == code) throw ConfigError("duplicate language code: " + code);
  rows_.push_back({code, m, ro, f, static_cast<int>(rows_.size())});
}

Registry Registry::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("registry: bad JSON: ") + e.what());
  }
  if (!j.is_array()) throw ConfigError("registry: top level must be an array");
  Registry r;
  for (const auto& row : j) {
    for (const auto& [key, _] : row.items())
      if (key != "code" && key != "morphology" && key != "reordering" && key != "family")
        throw ConfigError("registry: unknown key '" + key + "'");
    r.add(row.at("code").get<std::string>(),
          parse_morphology(row.at("morphology").get<std::string>()),
          parse_reordering(row.at("reordering").get<std::string>()),
          parse_family(row.at("family").get<std::string>()));
  }
  return r;
}

Registry Registry::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("registry: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string Registry::to_json_text() const {
  json j = json::array();
  for (const auto& row : rows_) {
    j.push_back({{"code", row.code},
                 {"morphology", to_string(row.morphology)},
                 {"reordering", to_string(row.reordering)},
                 {"family", to_string(row.family)}});
  }
  return j.dump(2);
}

const LanguageProfile& Registry::lookup(const std::string& code) const {
  for (const auto& row : rows_)
    if (row.code == code) return row;
  throw UnknownLanguageError("unknown language code: " + code);
}

bool Registry::has(const std::string& code) const {
  for (const auto& row : rows_)
    if (row.code == code) return true;
  return false;
}

int Registry::index_of(const std::string& code) const { return lookup(code).residual_index; }

namespace {
constexpr double kEmbedInitStd = 0.02;
}

TypologyTables::TypologyTables(const Registry& reg, const TypologyDims& d, Rng& rng)
    : morph("typology.morph", Array::randn({3, d.morph}, rng, kEmbedInitStd)),
      reorder("typology.reorder", Array::randn({2, d.reorder}, rng, kEmbedInitStd)),
      family("typology.family", Array::randn({3, d.family}, rng, kEmbedInitStd)),
      residual("typology.residual", Array::randn({reg.size(), d.residual}, rng, kEmbedInitStd)),
      dims(d) {}

std::size_t TypologyTables::active_width() const {
  std::size_t w = 0;
  if (active[0]) w += dims.morph;
  if (active[1]) w += dims.reorder;
  if (active[2]) w += dims.family;
  if (active[3]) w += dims.residual;
  return w;
}

void TypologyTables::drop_channel(Channel c) {
  active[static_cast<std::size_t>(c)] = false;
  switch (c) {
    case Channel::Morph: morph.value.fill(0.0); break;
    case Channel::Reorder: reorder.value.fill(0.0); break;
    case Channel::Family: family.value.fill(0.0); break;
    case Channel::Residual: residual.value.fill(0.0); break;
  }
}

FusionParams::FusionParams(std::size_t fused, std::size_t in_width, Rng& rng)
    : w("fusion.w", Array::randn({fused, in_width}, rng, kEmbedInitStd)),
      b("fusion.b", Array({1, fused})),
      ln_gain("fusion.ln_gain", Array::full({1, fused}, 1.0)),
      ln_bias("fusion.ln_bias", Array({1, fused})) {}

Var fuse(Graph& g, const LanguageProfile& profile, TypologyTables& tables, FusionParams& fusion,
         bool want_grad) {
  std::vector<Var> parts;
  if (tables.active[0])
    parts.push_back(s2st::ad::embedding(g.use(tables.morph, want_grad),
                                        {static_cast<int>(profile.morphology)}));
  if (tables.active[1])
    parts.push_back(s2st::ad::embedding(g.use(tables.reorder, want_grad),
                                        {static_cast<int>(profile.reordering)}));
  if (tables.active[2])
    parts.push_back(s2st::ad::embedding(g.use(tables.family, want_grad),
                                        {static_cast<int>(profile.family)}));
  if (tables.active[3])
    parts.push_back(
        s2st::ad::embedding(g.use(tables.residual, want_grad), {profile.residual_index}));
  Var cat = parts.size() == 1 ? parts[0] : s2st::ad::concat(parts, 1);
  require_shape(cat.value().cols() == fusion.w.value.cols(),
                "fuse: concat width " + std::to_string(cat.value().cols()) +
                    " vs fusion matrix " + shape_str(fusion.w.value));
  Var z = s2st::ad::linear(cat, g.use(fusion.w, want_grad), g.use(fusion.b, want_grad));
  Var n = s2st::ad::layer_norm(z, g.use(fusion.ln_gain, want_grad),
                               g.use(fusion.ln_bias, want_grad));
  return s2st::ad::gelu(n);
}

FlatTable::FlatTable(const Registry& reg, std::size_t width, Rng& rng)
    : table("flat.table", Array::randn({reg.size(), width}, rng, kEmbedInitStd)) {}

Var flat_fuse(Graph& g, const std::string& code, const Registry& reg, FlatTable& flat,
              FusionParams& fusion, bool want_grad) {
  const LanguageProfile& profile = reg.lookup(code);  // UnknownLanguageError on miss
  Var e = s2st::ad::embedding(g.use(flat.table, want_grad), {profile.residual_index});
  Var z = s2st::ad::linear(e, g.use(fusion.w, want_grad), g.use(fusion.b, want_grad));
  Var n = s2st::ad::layer_norm(z, g.use(fusion.ln_gain, want_grad),
                               g.use(fusion.ln_bias, want_grad));
  return s2st::ad::gelu(n);
}

}  // namespace s2st::typo
