#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace s2st::synth {

/// Knobs for one synthetic language. Targets are always the canonical SVO
/// frame; the source applies this language's order and morphology rules, all
/// of which are invertible so the task stays exactly solvable.
struct SynthLanguageSpec {
  enum class Order { Svo, VerbFinal };

  std::string code;
  std::size_t lexicon = 40;
  double suffix_rate = 0.0;    // agglutinative: chance of a case suffix per word
  double compound_rate = 0.0;  // compounding: chance of merging adjacent words
  Order order = Order::Svo;
  double noise = 0.05;         // encoder stand-in noise level
  std::string family_tag;     // languages sharing a tag share lexemes
  double shared_fraction = 0.0;
};

struct CorpusSpec {
  std::vector<SynthLanguageSpec> languages;
  std::size_t train_per_lang = 2000;
  std::size_t dev_per_lang = 100;
  std::size_t test_per_lang = 100;
  std::size_t min_len = 4;
  std::size_t max_len = 12;
  std::uint64_t seed = 77;

  /// Four languages mirroring the supported typology pattern: a related SVO
  /// fusional pair, a verb-final compounding language, and a verb-final
  /// agglutinative language.
  static CorpusSpec defaults();
  void validate() const;  // duplicate codes -> ConfigError
  const SynthLanguageSpec& language(const std::string& code) const;
};

struct ParallelUtterance {
  std::uint64_t id;
  std::string lang;
  std::vector<std::string> src;
  std::vector<std::string> tgt;
};

struct Corpus {
  CorpusSpec spec;
  std::vector<ParallelUtterance> train, dev, test;
  std::vector<std::string> src_vocab;  // sorted token types over all splits
  std::vector<std::string> tgt_vocab;

  const std::vector<ParallelUtterance>& split(const std::string& name) const;
};

/// Lexicon naming and the rule-based inversion oracle; a pure function of the
/// spec, independent of any generated corpus.
class SynthTask {
 public:
  explicit SynthTask(CorpusSpec spec);

  const CorpusSpec& spec() const { return spec_; }
  std::string source_lexeme(const SynthLanguageSpec& lang, std::size_t concept_id) const;
  std::string target_word(std::size_t concept_id) const;

  /// Strips function tokens, splits compounds, inverts the order rule, and
  /// maps lexemes back to target words. Exact on any generated utterance.
  std::vector<std::string> oracle_translate(const std::string& lang_code,
                                            const std::vector<std::string>& src) const;

  /// Suffixes and particles carry no target content; both render with a
  /// leading '+'.
  static bool is_function_token(const std::string& tok) { return !tok.empty() && tok[0] == '+'; }

 private:
  CorpusSpec spec_;
  std::map<std::string, std::map<std::string, std::size_t>> lexeme_to_concept_;
};

Corpus generate_corpus(const CorpusSpec& spec);

/// Seeded per-language subsample of the train split; nested across fractions
/// under a shared seed (smaller budgets are prefixes of larger ones). dev and
/// test are kept whole. Throws Error when the result would be empty.
Corpus budget_subset(const Corpus& corpus, double fraction, std::uint64_t seed);

/// Tab-separated UTF-8 records (id, lang, source tokens, target tokens), one
/// file per split, plus vocab lists and a meta echo of the spec.
void write_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

std::string spec_to_json_text(const CorpusSpec& spec);
CorpusSpec spec_from_json_text(const std::string& text);

}  // namespace s2st::synth
