#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "s2st/core/graph.hpp"
#include "s2st/core/ops.hpp"
#include "s2st/core/rng.hpp"

namespace s2st::typo {

using s2st::ad::Graph;
using s2st::ad::Param;
using s2st::ad::Var;

enum class Morphology { Fusional, FusionalCompounding, Agglutinative };
enum class Reordering { SvoOriented, VerbClauseFinal };
enum class Family { Romance, Germanic, Japonic };

Morphology parse_morphology(const std::string& s);
Reordering parse_reordering(const std::string& s);
Family parse_family(const std::string& s);
std::string to_string(Morphology m);
std::string to_string(Reordering r);
std::string to_string(Family f);

struct LanguageProfile {
  std::string code;
  Morphology morphology;
  Reordering reordering;
  Family family;
  int residual_index;  // unique per language
};

/// Immutable language table. The built-in rows mirror the four supported
/// source languages; more can be declared in a JSON config (code, morphology,
/// reordering, family), each receiving the next residual slot.
class Registry {
 public:
  static Registry builtin();
  static Registry from_json_file(const std::string& path);
  static Registry from_json_text(const std::string& text);

  void add(const std::string& code, Morphology m, Reordering r, Family f);

  const LanguageProfile& lookup(const std::string& code) const;  // UnknownLanguageError
  bool has(const std::string& code) const;
  int index_of(const std::string& code) const;
  const std::vector<LanguageProfile>& languages() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::string to_json_text() const;

 private:
  std::vector<LanguageProfile> rows_;
};

struct TypologyDims {
  std::size_t morph = 64;
  std::size_t reorder = 64;
  std::size_t family = 64;
  std::size_t residual = 128;
  std::size_t fused = 256;
  std::size_t concat_width() const { return morph + reorder + family + residual; }
};

enum class Channel { Morph = 0, Reorder = 1, Family = 2, Residual = 3 };
Channel parse_channel(const std::string& s);

/// Trainable embedding tables for the four channels. `active` realizes the
/// per-channel removal ablations: an inactive channel's table is zeroed and
/// never consumed, and the fusion matrix is built without its columns.
struct TypologyTables {
  Param morph;     // (3 x d1)
  Param reorder;   // (2 x d2)
  Param family;    // (3 x d3)
  Param residual;  // (n_langs x d4)
  TypologyDims dims;
  std::array<bool, 4> active{true, true, true, true};

  TypologyTables() = default;
  TypologyTables(const Registry& reg, const TypologyDims& dims, Rng& rng);

  std::size_t active_width() const;
  void drop_channel(Channel c);
};

struct FusionParams {
  Param w;        // (fused x active_width)
  Param b;        // (1 x fused)
  Param ln_gain;  // (1 x fused)
  Param ln_bias;  // (1 x fused)

  FusionParams() = default;
  FusionParams(std::size_t fused, std::size_t in_width, Rng& rng);
};

/// r_lang = GELU(LN(W [e_m; e_w; e_f; e_r] + b)), a 1 x fused row vector.
Var fuse(Graph& g, const LanguageProfile& profile, TypologyTables& tables, FusionParams& fusion,
         bool want_grad = true);

/// Flat per-language embedding table for the hierarchical-encoding ablation.
struct FlatTable {
  Param table;  // (n_langs x concat_width)
  FlatTable() = default;
  FlatTable(const Registry& reg, std::size_t width, Rng& rng);
};

Var flat_fuse(Graph& g, const std::string& code, const Registry& reg, FlatTable& flat,
              FusionParams& fusion, bool want_grad = true);

}  // namespace s2st::typo
