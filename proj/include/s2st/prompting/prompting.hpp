#pragma once

#include <map>
#include <string>
#include <vector>

namespace s2st::prompting {

/// Shared system instruction plus per-language translation guidance. Texts are
/// editable config resources; the built-in set covers the default registry.
struct PromptTemplates {
  std::string system;
  std::map<std::string, std::string> instruction;    // typology-aware guidance
  std::map<std::string, std::string> language_name;  // for the language-aware variant

  static PromptTemplates builtin();
  static PromptTemplates from_json_file(const std::string& path);
  static PromptTemplates from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct PromptSpec {
  std::string system_text;
  std::string language_text;  // empty on fallback
  std::string assembled;
  std::vector<std::string> tokens;
  std::vector<int> ids;  // catalog-relative; empty without a catalog
  bool fallback_warning = false;
};

/// Deterministic token <-> id table over every token any template can emit
/// (both prompt variants), so prompt renderings are stable model inputs.
class PromptCatalog {
 public:
  PromptCatalog() = default;
  explicit PromptCatalog(const PromptTemplates& templates);
  int id_of(const std::string& token) const;  // VocabularyError on miss
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

/// System text plus the language's typological guidance. An unregistered code
/// falls back to the system text alone with the warning flag set.
PromptSpec build_prompt(const std::string& code, const PromptTemplates& templates,
                        const PromptCatalog* catalog = nullptr);

/// Ablation variant: names the source language with no typological guidance.
PromptSpec language_aware_prompt(const std::string& code, const PromptTemplates& templates,
                                 const PromptCatalog* catalog = nullptr);

std::vector<std::string> whitespace_tokens(const std::string& text);

}  // namespace s2st::prompting
