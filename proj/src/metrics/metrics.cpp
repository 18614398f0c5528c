#include "s2st/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "s2st/error.hpp"

namespace s2st::metrics {

namespace {

void check_lengths(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs) {
  if (hyps.size() != refs.size())
    throw Error("metrics: " + std::to_string(hyps.size()) + " hypotheses vs " +
                std::to_string(refs.size()) + " references");
}

std::unordered_map<std::string, int> ngram_counts(const TokenSeq& toks, int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      key += toks[i + static_cast<std::size_t>(j)];
      key += '\x1f';
    }
    ++counts[key];
  }
  return counts;
}

std::size_t edit_distance(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double corpus_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                   int max_n) {
  check_lengths(hyps, refs);
  if (refs.empty()) throw Error("metrics: empty reference corpus");

  std::size_t hyp_len = 0, ref_len = 0;
  std::vector<double> matched(static_cast<std::size_t>(max_n), 0.0);
  std::vector<double> total(static_cast<std::size_t>(max_n), 0.0);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += hyps[i].size();
    ref_len += refs[i].size();
    for (int n = 1; n <= max_n; ++n) {
      auto hc = ngram_counts(hyps[i], n);
      auto rc = ngram_counts(refs[i], n);
      for (const auto& [key, count] : hc) {
        auto it = rc.find(key);
        if (it != rc.end()) matched[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
        total[static_cast<std::size_t>(n - 1)] += count;
      }
    }
  }
  if (hyp_len == 0) return 0.0;

  double log_prec = 0.0;
  double smooth = 1.0;
  for (int n = 0; n < max_n; ++n) {
    double p;
    if (matched[static_cast<std::size_t>(n)] > 0.0) {
      p = matched[static_cast<std::size_t>(n)] / total[static_cast<std::size_t>(n)];
    } else {
      smooth *= 2.0;
      p = 1.0 / (smooth * std::max(total[static_cast<std::size_t>(n)], 1.0));
    }
    log_prec += std::log(p);
  }
  double bp = hyp_len >= ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_prec / static_cast<double>(max_n));
}

double token_error_rate(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs) {
  check_lengths(hyps, refs);
  std::size_t errors = 0, ref_tokens = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    errors += edit_distance(hyps[i], refs[i]);
    ref_tokens += refs[i].size();
  }
  if (ref_tokens == 0) throw Error("metrics: reference corpus has no tokens");
  return static_cast<double>(errors) / static_cast<double>(ref_tokens);
}

double exact_match_rate(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs) {
  check_lengths(hyps, refs);
  if (hyps.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i)
    if (hyps[i] == refs[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(hyps.size());
}

EvalReport evaluate(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                    const std::vector<std::string>& langs) {
  check_lengths(hyps, refs);
  if (hyps.size() != langs.size()) throw Error("metrics: language labels do not match pairs");
  EvalReport report;
  report.bleu = corpus_bleu(hyps, refs);
  report.token_error = token_error_rate(hyps, refs);
  report.exact_match = exact_match_rate(hyps, refs);
  std::map<std::string, std::vector<std::size_t>> by_lang;
  for (std::size_t i = 0; i < langs.size(); ++i) by_lang[langs[i]].push_back(i);
  for (const auto& [lang, idx] : by_lang) {
    std::vector<TokenSeq> h, r;
    for (std::size_t i : idx) {
      h.push_back(hyps[i]);
      r.push_back(refs[i]);
    }
    report.bleu_by_lang[lang] = corpus_bleu(h, r);
    report.token_error_by_lang[lang] = token_error_rate(h, r);
    report.exact_by_lang[lang] = exact_match_rate(h, r);
    report.count_by_lang[lang] = idx.size();
  }
  return report;
}

std::string EvalReport::to_json_text() const {
  nlohmann::json per_lang = nlohmann::json::object();
  for (const auto& [lang, b] : bleu_by_lang) {
    per_lang[lang] = {{"bleu", b},
                      {"token_error", token_error_by_lang.at(lang)},
                      {"exact_match", exact_by_lang.at(lang)},
                      {"count", count_by_lang.at(lang)}};
  }
  return nlohmann::json{{"bleu", bleu},
                        {"token_error", token_error},
                        {"exact_match", exact_match},
                        {"per_language", per_lang}}
      .dump(2);
}

}  // namespace s2st::metrics
