#pragma once

#include <map>
#include <string>
#include <vector>

namespace s2st::metrics {

using TokenSeq = std::vector<std::string>;

/// Corpus BLEU: geometric mean of clipped n-gram precisions times the brevity
/// penalty. Exponential smoothing: each zero-match order n contributes
/// 1 / (2^k * max(total_n, 1)) with k counting zero orders so far. Returns a
/// value on the 0..100 scale; empty hypothesis corpora score 0.
double corpus_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                   int max_n = 4);

/// Sum of token-level Levenshtein distances divided by total reference tokens.
double token_error_rate(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs);

double exact_match_rate(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs);

struct EvalReport {
  double bleu = 0.0;
  double token_error = 0.0;
  double exact_match = 0.0;
  std::map<std::string, double> bleu_by_lang;
  std::map<std::string, double> token_error_by_lang;
  std::map<std::string, double> exact_by_lang;
  std::map<std::string, std::size_t> count_by_lang;

  std::string to_json_text() const;
};

/// Full report with a per-language breakdown; langs[i] labels pair i.
EvalReport evaluate(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                    const std::vector<std::string>& langs);

}  // namespace s2st::metrics
