#include "s2st/prompting/prompting.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "s2st/error.hpp"

namespace s2st::prompting {

using nlohmann::json;

namespace {
constexpr const char* kSeparator = " | ";
}

PromptTemplates PromptTemplates::builtin() {
  PromptTemplates t;
  t.system =
      "translate the source utterance into english and output only the translation";
  t.instruction["fr"] =
      "the source favors idiomatic expressions so prefer natural english wording over "
      "literal word for word choices";
  t.instruction["es"] =
      "the source favors idiomatic expressions so pick english lexical choices by context "
      "rather than literal glosses";
  t.instruction["de"] =
      "the source builds long compound words that must be split into separate english words "
      "and its verbs arrive clause final so reorder them earlier for english";
  t.instruction["ja"] =
      "the source orders clauses subject object verb with the verb clause final so reorder "
      "into subject verb object then restore subjects the source omits and normalize "
      "honorific forms to plain english";
  t.language_name["fr"] = "french";
  t.language_name["es"] = "spanish";
  t.language_name["de"] = "german";
  t.language_name["ja"] = "japanese";
  return t;
}

PromptTemplates PromptTemplates::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prompts: bad JSON: ") + e.what());
  }
  PromptTemplates t;
  for (const auto& [key, _] : j.items())
    if (key != "system" && key != "languages")
      throw ConfigError("prompts: unknown key '" + key + "'");
  t.system = j.at("system").get<std::string>();
  for (const auto& [code, entry] : j.at("languages").items()) {
    for (const auto& [key, _] : entry.items())
      if (key != "name" && key != "instruction")
        throw ConfigError("prompts: languages." + code + ": unknown key '" + key + "'");
    t.language_name[code] = entry.at("name").get<std::string>();
    t.instruction[code] = entry.at("instruction").get<std::string>();
  }
  return t;
}

PromptTemplates PromptTemplates::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("prompts: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string PromptTemplates::to_json_text() const {
  json langs = json::object();
  for (const auto& [code, instr] : instruction) {
    langs[code] = {{"name", language_name.count(code) ? language_name.at(code) : code},
                   {"instruction", instr}};
  }
  return json{{"system", system}, {"languages", langs}}.dump(2);
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

PromptCatalog::PromptCatalog(const PromptTemplates& t) {
  auto absorb = [&](const std::string& text) {
    for (const auto& tok : whitespace_tokens(text))
      if (!index_.count(tok)) {
        index_[tok] = static_cast<int>(tokens_.size());
        tokens_.push_back(tok);
      }
  };
  absorb(t.system);
  absorb("|");  // separator between system and language instruction
  for (const auto& [code, instr] : t.instruction) absorb(instr);
  absorb("the source language is");
  for (const auto& [code, name] : t.language_name) absorb(name);
}

int PromptCatalog::id_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw VocabularyError("prompt token not in catalog: " + token);
  return it->second;
}

namespace {

PromptSpec assemble(const std::string& system, const std::string& language_text,
                    bool fallback, const PromptCatalog* catalog) {
  PromptSpec spec;
  spec.system_text = system;
  spec.language_text = language_text;
  spec.fallback_warning = fallback;
  spec.assembled = language_text.empty() ? system : system + kSeparator + language_text;
  spec.tokens = whitespace_tokens(spec.assembled);
  if (catalog)
    for (const auto& tok : spec.tokens) spec.ids.push_back(catalog->id_of(tok));
  return spec;
}

}  // namespace

PromptSpec build_prompt(const std::string& code, const PromptTemplates& templates,
                        const PromptCatalog* catalog) {
  auto it = templates.instruction.find(code);
  if (it == templates.instruction.end())
    return assemble(templates.system, "", /*fallback=*/true, catalog);
  return assemble(templates.system, it->second, /*fallback=*/false, catalog);
}

PromptSpec language_aware_prompt(const std::string& code, const PromptTemplates& templates,
                                 const PromptCatalog* catalog) {
  auto it = templates.language_name.find(code);
  if (it == templates.language_name.end())
    return assemble(templates.system, "", /*fallback=*/true, catalog);
  return assemble(templates.system, "the source language is " + it->second, false, catalog);
}

}  // namespace s2st::prompting
