#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "s2st/error.hpp"
#include "s2st/prompting/prompting.hpp"

using namespace s2st;
using namespace s2st::prompting;

namespace {
bool contains_token(const PromptSpec& spec, const std::string& tok) {
  return std::find(spec.tokens.begin(), spec.tokens.end(), tok) != spec.tokens.end();
}
}  // namespace

TEST_CASE("german prompt carries compound and reordering guidance") {
  PromptTemplates t = PromptTemplates::builtin();
  PromptSpec de = build_prompt("de", t);
  CHECK(contains_token(de, "compound"));
  CHECK(contains_token(de, "reorder"));
  CHECK_FALSE(de.fallback_warning);
}

TEST_CASE("japanese prompt carries order, omitted-subject, and honorific guidance") {
  PromptTemplates t = PromptTemplates::builtin();
  PromptSpec ja = build_prompt("ja", t);
  CHECK(contains_token(ja, "reorder"));
  CHECK(contains_token(ja, "omits"));
  CHECK(contains_token(ja, "honorific"));
}

TEST_CASE("french and spanish prompts carry the idiomatic-usage theme") {
  PromptTemplates t = PromptTemplates::builtin();
  CHECK(contains_token(build_prompt("fr", t), "idiomatic"));
  CHECK(contains_token(build_prompt("es", t), "idiomatic"));
}

TEST_CASE("prompt assembly is deterministic") {
  PromptTemplates t = PromptTemplates::builtin();
  PromptCatalog cat(t);
  PromptSpec a = build_prompt("fr", t, &cat);
  PromptSpec b = build_prompt("fr", t, &cat);
  CHECK(a.assembled == b.assembled);
  CHECK(a.ids == b.ids);
  CHECK(language_aware_prompt("es", t).assembled == language_aware_prompt("es", t).assembled);
}

TEST_CASE("language-aware variant names the language without typology terms") {
  PromptTemplates t = PromptTemplates::builtin();
  for (const char* code : {"fr", "es", "de", "ja"}) {
    PromptSpec v = language_aware_prompt(code, t);
    CHECK(contains_token(v, t.language_name.at(code)));
    CHECK_FALSE(contains_token(v, "compound"));
    CHECK_FALSE(contains_token(v, "idiomatic"));
    CHECK_FALSE(contains_token(v, "reorder"));
    CHECK_FALSE(contains_token(v, "honorific"));
    // variant and full prompt differ for every registered language
    CHECK(v.assembled != build_prompt(code, t).assembled);
  }
}

TEST_CASE("unregistered code falls back to the system text with a warning") {
  PromptTemplates t = PromptTemplates::builtin();
  PromptSpec xx = build_prompt("xx", t);
  CHECK(xx.fallback_warning);
  CHECK(xx.assembled == t.system);
  CHECK(xx.language_text.empty());
}

TEST_CASE("prompt content is a pure function of code and templates") {
  PromptTemplates t = PromptTemplates::builtin();
  // no utterance-level inputs exist in the interface; spot-check stability
  // across interleaved calls for different codes
  PromptSpec a1 = build_prompt("ja", t);
  build_prompt("de", t);
  PromptSpec a2 = build_prompt("ja", t);
  CHECK(a1.assembled == a2.assembled);
}

TEST_CASE("catalog renders every template token and rejects strangers") {
  PromptTemplates t = PromptTemplates::builtin();
  PromptCatalog cat(t);
  for (const char* code : {"fr", "es", "de", "ja"}) {
    PromptSpec full = build_prompt(code, t, &cat);
    CHECK(full.ids.size() == full.tokens.size());
    PromptSpec v = language_aware_prompt(code, t, &cat);
    CHECK(v.ids.size() == v.tokens.size());
  }
  CHECK_THROWS_AS(cat.id_of("zzz_not_a_prompt_token"), VocabularyError);
}

TEST_CASE("templates round-trip through json") {
  PromptTemplates t = PromptTemplates::builtin();
  PromptTemplates back = PromptTemplates::from_json_text(t.to_json_text());
  CHECK(back.system == t.system);
  CHECK(back.instruction == t.instruction);
  CHECK(back.language_name == t.language_name);
  CHECK_THROWS_AS(PromptTemplates::from_json_text("{\"system\":\"x\",\"bogus\":1}"),
                  ConfigError);
}
