#include "s2st/synthdata/synthdata.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "s2st/core/rng.hpp"
#include "s2st/error.hpp"

namespace s2st::synth {

using nlohmann::json;

CorpusSpec CorpusSpec::defaults() {
  CorpusSpec spec;
  SynthLanguageSpec fr{"fr", 40, 0.0, 0.0, SynthLanguageSpec::Order::Svo, 0.05, "rom", 0.6};
  SynthLanguageSpec es{"es", 40, 0.0, 0.0, SynthLanguageSpec::Order::Svo, 0.05, "rom", 0.6};
  SynthLanguageSpec de{"de", 40, 0.0, 0.35, SynthLanguageSpec::Order::VerbFinal, 0.05, "ger", 0.0};
  SynthLanguageSpec ja{"ja", 40, 0.5, 0.0, SynthLanguageSpec::Order::VerbFinal, 0.05, "jap", 0.0};
  spec.languages = {fr, es, de, ja};
  return spec;
}

void CorpusSpec::validate() const {
  if (languages.empty()) throw ConfigError("corpus spec: no languages");
  for (std::size_t i = 0; i < languages.size(); ++i)
    for (std::size_t j = i + 1; j < languages.size(); ++j)
      if (languages[i].code == languages[j].code)
        throw ConfigError("corpus spec: duplicate language code " + languages[i].code);
  if (min_len < 2 || max_len < min_len)
    throw ConfigError("corpus spec: need 2 <= min_len <= max_len");
  for (const auto& l : languages) {
    if (l.lexicon < max_len)
      throw ConfigError("corpus spec: lexicon of " + l.code +
                        " smaller than max_len (concepts are drawn without replacement)");
    if (l.shared_fraction < 0.0 || l.shared_fraction > 1.0 || l.suffix_rate < 0.0 ||
        l.suffix_rate > 1.0 || l.compound_rate < 0.0 || l.compound_rate > 1.0)
      throw ConfigError("corpus spec: rates for " + l.code + " must lie in [0,1]");
  }
}

const SynthLanguageSpec& CorpusSpec::language(const std::string& code) const {
  for (const auto& l : languages)
    if (l.code == code) return l;
  throw UnknownLanguageError("corpus spec: no language " + code);
}

const std::vector<ParallelUtterance>& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw ConfigError("unknown split: " + name);
}

namespace {

const char* kSyllables[10] = {"ba", "de", "ki", "lo", "mu", "na", "po", "re", "si", "tu"};

std::string syllword(std::size_t c) {
  std::string w;
  if (c >= 100) w += kSyllables[(c / 100) % 10];
  w += kSyllables[(c / 10) % 10];
  w += kSyllables[c % 10];
  return w;
}

const char* kSuffixes[4] = {"ga", "wo", "ni", "wa"};
const char* kParticles[3] = {"der", "die", "das"};

std::size_t shared_count(const SynthLanguageSpec& lang) {
  return static_cast<std::size_t>(lang.shared_fraction * static_cast<double>(lang.lexicon) + 0.5);
}

}  // namespace

SynthTask::SynthTask(CorpusSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& lang : spec_.languages) {
    auto& inv = lexeme_to_concept_[lang.code];
    for (std::size_t c = 0; c < lang.lexicon; ++c) inv[source_lexeme(lang, c)] = c;
  }
}

std::string SynthTask::source_lexeme(const SynthLanguageSpec& lang, std::size_t concept_id) const {
  const bool shared = !lang.family_tag.empty() && concept_id < shared_count(lang);
  return (shared ? lang.family_tag : lang.code) + syllword(concept_id);
}

std::string SynthTask::target_word(std::size_t concept_id) const { return "en" + syllword(concept_id); }

std::vector<std::string> SynthTask::oracle_translate(const std::string& lang_code,
                                                     const std::vector<std::string>& src) const {
  const SynthLanguageSpec& lang = spec_.language(lang_code);
  const auto& inv = lexeme_to_concept_.at(lang_code);
  std::vector<std::string> lexemes;
  for (const auto& tok : src) {
    if (is_function_token(tok)) continue;  // suffixes, particles
    std::size_t plus = tok.find('+');
    if (plus != std::string::npos) {       // compound
      lexemes.push_back(tok.substr(0, plus));
      lexemes.push_back(tok.substr(plus + 1));
    } else {
      lexemes.push_back(tok);
    }
  }
  if (lang.order == SynthLanguageSpec::Order::VerbFinal && lexemes.size() >= 2) {
    std::string verb = lexemes.back();
    lexemes.pop_back();
    lexemes.insert(lexemes.begin() + 1, verb);
  }
  std::vector<std::string> out;
  for (const auto& lex : lexemes) {
    auto it = inv.find(lex);
    if (it == inv.end()) throw VocabularyError("oracle: unknown lexeme " + lex);
    out.push_back(target_word(it->second));
  }
  return out;
}

namespace {

ParallelUtterance make_utterance(const SynthTask& task, const SynthLanguageSpec& lang,
                                 std::uint64_t id, Rng& rng) {
  const CorpusSpec& spec = task.spec();
  const std::size_t m =
      static_cast<std::size_t>(rng.uniform_int(static_cast<int>(spec.min_len),
                                               static_cast<int>(spec.max_len)));
  // distinct concepts, partial Fisher-Yates
  std::vector<std::size_t> pool(lang.lexicon);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  std::vector<std::size_t> concepts;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(i), static_cast<int>(pool.size()) - 1));
    std::swap(pool[i], pool[j]);
    concepts.push_back(pool[i]);
  }

  ParallelUtterance utt;
  utt.id = id;
  utt.lang = lang.code;
  for (std::size_t c : concepts) utt.tgt.push_back(task.target_word(c));

  // order rule: verb-final moves the concept at canonical position 1 to the end
  std::vector<std::size_t> order = concepts;
  if (lang.order == SynthLanguageSpec::Order::VerbFinal) {
    std::size_t verb = order[1];
    order.erase(order.begin() + 1);
    order.push_back(verb);
  }

  std::vector<std::string> toks;
  for (std::size_t c : order) toks.push_back(task.source_lexeme(lang, c));

  // compounding merges adjacent words; each compound gets a particle in front
  // so the frame budget for the target CTC branch stays intact
  if (lang.compound_rate > 0.0) {
    std::vector<std::string> merged;
    std::size_t i = 0;
    while (i < toks.size()) {
      if (i + 1 < toks.size() && rng.uniform() < lang.compound_rate) {
        merged.push_back(std::string("+") + kParticles[rng.uniform_int(0, 2)]);
        merged.push_back(toks[i] + "+" + toks[i + 1]);
        i += 2;
      } else {
        merged.push_back(toks[i]);
        i += 1;
      }
    }
    toks = std::move(merged);
  }

  // agglutinative case suffixes, one per word at most
  if (lang.suffix_rate > 0.0) {
    std::vector<std::string> suffixed;
    for (const auto& tok : toks) {
      suffixed.push_back(tok);
      if (rng.uniform() < lang.suffix_rate)
        suffixed.push_back(std::string("+") + kSuffixes[rng.uniform_int(0, 3)]);
    }
    toks = std::move(suffixed);
  }

  utt.src = std::move(toks);
  return utt;
}

}  // namespace

Corpus generate_corpus(const CorpusSpec& spec) {
  SynthTask task(spec);
  Corpus corpus;
  corpus.spec = task.spec();

  struct SplitPlan {
    const char* name;
    std::size_t count;
    std::vector<ParallelUtterance>* out;
  };
  // ids partition deterministically by (language, split, index)
  std::uint64_t lang_block = 0;
  for (const auto& lang : corpus.spec.languages) {
    SplitPlan plans[3] = {{"train", corpus.spec.train_per_lang, &corpus.train},
                          {"dev", corpus.spec.dev_per_lang, &corpus.dev},
                          {"test", corpus.spec.test_per_lang, &corpus.test}};
    std::uint64_t split_block = 0;
    for (const auto& plan : plans) {
      for (std::size_t i = 0; i < plan.count; ++i) {
        std::uint64_t id = (lang_block << 40) | (split_block << 32) | i;
        Rng rng(hash_mix(corpus.spec.seed, id));
        plan.out->push_back(make_utterance(task, lang, id, rng));
      }
      ++split_block;
    }
    ++lang_block;
  }

  std::set<std::string> src_types, tgt_types;
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test})
    for (const auto& utt : *split) {
      src_types.insert(utt.src.begin(), utt.src.end());
      tgt_types.insert(utt.tgt.begin(), utt.tgt.end());
    }
  corpus.src_vocab.assign(src_types.begin(), src_types.end());
  corpus.tgt_vocab.assign(tgt_types.begin(), tgt_types.end());
  return corpus;
}

Corpus budget_subset(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw ConfigError("budget fraction must lie in (0, 1]");
  Corpus out = corpus;
  if (fraction == 1.0) return out;
  out.train.clear();
  std::size_t kept_total = 0;
  for (const auto& lang : corpus.spec.languages) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.train.size(); ++i)
      if (corpus.train[i].lang == lang.code) idx.push_back(i);
    Rng rng(hash_mix(seed, hash_str(lang.code.c_str())));
    rng.shuffle(idx);
    std::size_t keep = static_cast<std::size_t>(fraction * static_cast<double>(idx.size()));
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());  // stable original order
    for (std::size_t i : idx) out.train.push_back(corpus.train[i]);
    kept_total += keep;
  }
  if (kept_total == 0) throw Error("budget subset is empty");
  return out;
}

namespace {

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

void write_split(const std::string& path, const std::vector<ParallelUtterance>& split) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& utt : split)
    out << utt.id << '\t' << utt.lang << '\t' << join(utt.src) << '\t' << join(utt.tgt) << '\n';
}

std::vector<ParallelUtterance> read_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::vector<ParallelUtterance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id_s, lang, src_s, tgt_s;
    if (!std::getline(ss, id_s, '\t') || !std::getline(ss, lang, '\t') ||
        !std::getline(ss, src_s, '\t') || !std::getline(ss, tgt_s))
      throw Error("malformed corpus line: " + line);
    ParallelUtterance utt;
    utt.id = std::stoull(id_s);
    utt.lang = lang;
    utt.src = split_ws(src_s);
    utt.tgt = split_ws(tgt_s);
    out.push_back(std::move(utt));
  }
  return out;
}

}  // namespace

void write_corpus(const Corpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_split(dir + "/train.tsv", corpus.train);
  write_split(dir + "/dev.tsv", corpus.dev);
  write_split(dir + "/test.tsv", corpus.test);
  for (const auto& [name, vocab] :
       {std::pair{"src_vocab.txt", &corpus.src_vocab}, {"tgt_vocab.txt", &corpus.tgt_vocab}}) {
    std::ofstream out(dir + "/" + name);
    for (const auto& tok : *vocab) out << tok << '\n';
  }
  std::ofstream meta(dir + "/meta.json");
  meta << spec_to_json_text(corpus.spec) << '\n';
}

Corpus load_corpus(const std::string& dir) {
  std::ifstream meta(dir + "/meta.json");
  if (!meta) throw Error("cannot read " + dir + "/meta.json");
  std::ostringstream ss;
  ss << meta.rdbuf();
  Corpus corpus;
  corpus.spec = spec_from_json_text(ss.str());
  corpus.train = read_split(dir + "/train.tsv");
  corpus.dev = read_split(dir + "/dev.tsv");
  corpus.test = read_split(dir + "/test.tsv");
  for (const auto& [name, vocab] :
       {std::pair{"src_vocab.txt", &corpus.src_vocab}, {"tgt_vocab.txt", &corpus.tgt_vocab}}) {
    std::ifstream in(dir + "/" + name);
    if (!in) throw Error("cannot read vocab " + dir + "/" + name);
    std::string tok;
    while (std::getline(in, tok))
      if (!tok.empty()) vocab->push_back(tok);
  }
  return corpus;
}

std::string spec_to_json_text(const CorpusSpec& spec) {
  json langs = json::array();
  for (const auto& l : spec.languages) {
    langs.push_back({{"code", l.code},
                     {"lexicon", l.lexicon},
                     {"suffix_rate", l.suffix_rate},
                     {"compound_rate", l.compound_rate},
                     {"order", l.order == SynthLanguageSpec::Order::Svo ? "svo" : "verb_final"},
                     {"noise", l.noise},
                     {"family_tag", l.family_tag},
                     {"shared_fraction", l.shared_fraction}});
  }
  return json{{"languages", langs},
              {"train_per_lang", spec.train_per_lang},
              {"dev_per_lang", spec.dev_per_lang},
              {"test_per_lang", spec.test_per_lang},
              {"min_len", spec.min_len},
              {"max_len", spec.max_len},
              {"seed", spec.seed}}
      .dump(2);
}

CorpusSpec spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("corpus spec: bad JSON: ") + e.what());
  }
  CorpusSpec spec;
  for (const auto& [key, _] : j.items()) {
    if (key != "languages" && key != "train_per_lang" && key != "dev_per_lang" &&
        key != "test_per_lang" && key != "min_len" && key != "max_len" && key != "seed")
      throw ConfigError("corpus spec: unknown key '" + key + "'");
  }
  spec.train_per_lang = j.value("train_per_lang", spec.train_per_lang);
  spec.dev_per_lang = j.value("dev_per_lang", spec.dev_per_lang);
  spec.test_per_lang = j.value("test_per_lang", spec.test_per_lang);
  spec.min_len = j.value("min_len", spec.min_len);
  spec.max_len = j.value("max_len", spec.max_len);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("languages")) {
    spec.languages.clear();
    for (const auto& row : j.at("languages")) {
      for (const auto& [key, _] : row.items()) {
        if (key != "code" && key != "lexicon" && key != "suffix_rate" &&
            key != "compound_rate" && key != "order" && key != "noise" &&
            key != "family_tag" && key != "shared_fraction")
          throw ConfigError("corpus spec: languages: unknown key '" + key + "'");
      }
      SynthLanguageSpec l;
      l.code = row.at("code").get<std::string>();
      l.lexicon = row.value("lexicon", l.lexicon);
      l.suffix_rate = row.value("suffix_rate", l.suffix_rate);
      l.compound_rate = row.value("compound_rate", l.compound_rate);
      std::string order = row.value("order", std::string("svo"));
      if (order == "svo")
        l.order = SynthLanguageSpec::Order::Svo;
      else if (order == "verb_final")
        l.order = SynthLanguageSpec::Order::VerbFinal;
      else
        throw ConfigError("corpus spec: bad order '" + order + "'");
      l.noise = row.value("noise", l.noise);
      l.family_tag = row.value("family_tag", l.family_tag);
      l.shared_fraction = row.value("shared_fraction", l.shared_fraction);
      spec.languages.push_back(std::move(l));
    }
  } else {
    spec.languages = CorpusSpec::defaults().languages;
  }
  spec.validate();
  return spec;
}

}  // namespace s2st::synth
