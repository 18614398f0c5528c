#include "s2st/ctc/ctc.hpp"

#include <cmath>
#include <limits>

#include "s2st/error.hpp"

namespace s2st::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logadd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double logadd3(double a, double b, double c) { return logadd(logadd(a, b), c); }

struct ForwardBackward {
  double loss = 0.0;
  bool feasible = true;
  Array grad;  // dloss/dlattice, zero when infeasible
};

// Standard blank-interleaved forward-backward. alpha/beta both include the
// frame-t emission, so the posterior at (t, s) is alpha + beta - y[t][l's].
ForwardBackward forward_backward(const Array& lattice, const std::vector<int>& labels,
                                 bool need_grad) {
  const std::size_t T = lattice.rows();
  const std::size_t width = lattice.cols();
  const std::size_t L = labels.size();
  if (L == 0) throw InvalidLabelError("ctc_loss: label must be nonempty");
  for (int l : labels) {
    if (l == kBlank) throw InvalidLabelError("ctc_loss: label contains the blank index");
    if (l < 0 || static_cast<std::size_t>(l) >= width)
      throw InvalidLabelError("ctc_loss: label id " + std::to_string(l) +
                              " outside vocabulary of size " + std::to_string(width - 1));
  }
  ForwardBackward out;
  if (min_frames(labels) > T) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    if (need_grad) out.grad = Array::zeros_like(lattice);
    return out;
  }

  const std::size_t S = 2 * L + 1;
  auto ext = [&](std::size_t s) -> int {
    return (s % 2 == 0) ? kBlank : labels[(s - 1) / 2];
  };
  auto y = [&](std::size_t t, int k) { return lattice.at(t, static_cast<std::size_t>(k)); };

  std::vector<double> alpha(T * S, kNegInf);
  alpha[0 * S + 0] = y(0, kBlank);
  alpha[0 * S + 1] = y(0, ext(1));
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      double stay = alpha[(t - 1) * S + s];
      double step = s >= 1 ? alpha[(t - 1) * S + s - 1] : kNegInf;
      double skip = kNegInf;
      if (s >= 2 && ext(s) != kBlank && ext(s) != ext(s - 2))
        skip = alpha[(t - 1) * S + s - 2];
      double acc = logadd3(stay, step, skip);
      alpha[t * S + s] = acc == kNegInf ? kNegInf : acc + y(t, ext(s));
    }
  double log_p = logadd(alpha[(T - 1) * S + S - 1], alpha[(T - 1) * S + S - 2]);
  out.loss = -log_p;
  if (!need_grad) return out;

  std::vector<double> beta(T * S, kNegInf);
  beta[(T - 1) * S + S - 1] = y(T - 1, ext(S - 1));
  beta[(T - 1) * S + S - 2] = y(T - 1, ext(S - 2));
  for (std::size_t tt = T - 1; tt-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double stay = beta[(tt + 1) * S + s];
      double step = s + 1 < S ? beta[(tt + 1) * S + s + 1] : kNegInf;
      double skip = kNegInf;
      if (s + 2 < S && ext(s) != kBlank && ext(s) != ext(s + 2))
        skip = beta[(tt + 1) * S + s + 2];
      double acc = logadd3(stay, step, skip);
      beta[tt * S + s] = acc == kNegInf ? kNegInf : acc + y(tt, ext(s));
    }
  }

  // dL/dy[t][k] = -exp(lse_{s: l's = k}(alpha + beta) - y[t][k] - logP)
  out.grad = Array::zeros_like(lattice);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> acc(width, kNegInf);
    for (std::size_t s = 0; s < S; ++s) {
      double ab = alpha[t * S + s] + beta[t * S + s];
      if (ab == kNegInf) continue;
      int k = ext(s);
      acc[static_cast<std::size_t>(k)] = logadd(acc[static_cast<std::size_t>(k)], ab);
    }
    for (std::size_t k = 0; k < width; ++k) {
      if (acc[k] == kNegInf) continue;
      out.grad.at(t, k) = -std::exp(acc[k] - lattice.at(t, k) - log_p);
    }
  }
  return out;
}

}  // namespace

void validate_instance(const Array& lattice, const std::vector<int>& labels) {
  require_shape(lattice.ndim() == 2 && lattice.cols() >= 2,
                "ctc lattice must be T x (V+1), got " + shape_str(lattice));
  for (int l : labels)
    if (l == kBlank || l < 0 || static_cast<std::size_t>(l) >= lattice.cols())
      throw InvalidLabelError("ctc instance: invalid label id " + std::to_string(l));
  for (std::size_t t = 0; t < lattice.rows(); ++t) {
    double s = 0.0;
    for (std::size_t k = 0; k < lattice.cols(); ++k) s += std::exp(lattice.at(t, k));
    if (std::abs(s - 1.0) > 1e-9)
      throw Error("ctc instance: frame " + std::to_string(t) +
                  " probabilities sum to " + std::to_string(s));
  }
}

std::size_t min_frames(const std::vector<int>& labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

double ctc_loss_value(const Array& lattice, const std::vector<int>& labels) {
  return forward_backward(lattice, labels, false).loss;
}

Var ctc_loss(Graph& g, Var lattice, const std::vector<int>& labels) {
  ForwardBackward fb = forward_backward(lattice.value(), labels, true);
  Array grad = std::move(fb.grad);
  return g.node(Array::scalar(fb.loss), {lattice},
                [grad](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* gl = gg.grad_if_needed(in[0]))
                    for (std::size_t i = 0; i < grad.size(); ++i)
                      (*gl)[i] += gout[0] * grad[i];
                });
}

double ctc_brute_force(const Array& lattice, const std::vector<int>& labels) {
  const std::size_t T = lattice.rows();
  const std::size_t width = lattice.cols();
  for (int l : labels)
    if (l == kBlank || l < 0 || static_cast<std::size_t>(l) >= width)
      throw InvalidLabelError("ctc_brute_force: invalid label id " + std::to_string(l));
  double paths = std::pow(static_cast<double>(width), static_cast<double>(T));
  if (paths > 1e6)
    throw SizeError("ctc_brute_force: " + std::to_string(paths) + " paths exceed 1e6");

  const std::size_t n_paths = static_cast<std::size_t>(paths + 0.5);
  double acc = kNegInf;
  std::vector<int> path(T);
  std::vector<int> collapsed;
  collapsed.reserve(T);
  for (std::size_t idx = 0; idx < n_paths; ++idx) {
    std::size_t rem = idx;
    for (std::size_t t = 0; t < T; ++t) {
      path[t] = static_cast<int>(rem % width);
      rem /= width;
    }
    collapsed.clear();
    int prev = -1;
    for (std::size_t t = 0; t < T; ++t) {
      if (path[t] != prev && path[t] != kBlank) collapsed.push_back(path[t]);
      prev = path[t];
    }
    if (collapsed != labels) continue;
    double lp = 0.0;
    for (std::size_t t = 0; t < T; ++t)
      lp += lattice.at(t, static_cast<std::size_t>(path[t]));
    acc = logadd(acc, lp);
  }
  return -acc;
}

std::vector<int> greedy_decode(const Array& lattice) {
  std::vector<int> out;
  int prev = -1;
  for (std::size_t t = 0; t < lattice.rows(); ++t) {
    int best = 0;
    for (std::size_t k = 1; k < lattice.cols(); ++k)
      if (lattice.at(t, k) > lattice.at(t, static_cast<std::size_t>(best)))
        best = static_cast<int>(k);
    if (best != prev && best != kBlank) out.push_back(best);
    prev = best;
  }
  return out;
}

}  // namespace s2st::ctc
