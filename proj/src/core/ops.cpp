#include "s2st/core/ops.hpp"

#include <cmath>
#include <string>

#include "s2st/core/kernels.hpp"
#include "s2st/error.hpp"

namespace s2st::ad {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

Graph& same_graph(const Var& a, const Var& b) {
  if (a.graph() != b.graph()) throw Error("operands belong to different graphs");
  return *a.graph();
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  require_shape(a.value().same_shape(b.value()),
                std::string(op) + " operands " + shape_str(a.value()) + " vs " +
                    shape_str(b.value()));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Shared scaffolding for elementwise unary ops: dy/dx is computed from the
// input value and the output value.
template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
  Graph& g = *a.graph();
  const Array& x = a.value();
  Array y = Array::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  int aid = a.id();
  return g.node(std::move(y), {a},
                [aid, df](Graph& gg, const Array& gout, const std::vector<int>&) {
                  if (Array* ga = gg.grad_if_needed(aid)) {
                    const Array& x = gg.value(aid);
                    for (std::size_t i = 0; i < x.size(); ++i)
                      (*ga)[i] += gout[i] * df(x[i]);
                  }
                });
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  check_same_shape(a, b, "add");
  Array y = a.value();
  kernels::axpy(y.data(), b.value().data(), 1.0, y.size());
  return g.node(std::move(y), {a, b},
                [](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  for (int id : in)
                    if (Array* gi = gg.grad_if_needed(id))
                      kernels::axpy(gi->data(), gout.data(), 1.0, gout.size());
                });
}

Var sub(Var a, Var b) {
  Graph& g = same_graph(a, b);
  check_same_shape(a, b, "sub");
  Array y = a.value();
  kernels::axpy(y.data(), b.value().data(), -1.0, y.size());
  return g.node(std::move(y), {a, b},
                [](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* ga = gg.grad_if_needed(in[0]))
                    kernels::axpy(ga->data(), gout.data(), 1.0, gout.size());
                  if (Array* gb = gg.grad_if_needed(in[1]))
                    kernels::axpy(gb->data(), gout.data(), -1.0, gout.size());
                });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  check_same_shape(a, b, "mul");
  const Array& xa = a.value();
  const Array& xb = b.value();
  Array y = Array::zeros_like(xa);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] * xb[i];
  return g.node(std::move(y), {a, b},
                [](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  const Array& xa = gg.value(in[0]);
                  const Array& xb = gg.value(in[1]);
                  if (Array* ga = gg.grad_if_needed(in[0]))
                    for (std::size_t i = 0; i < gout.size(); ++i) (*ga)[i] += gout[i] * xb[i];
                  if (Array* gb = gg.grad_if_needed(in[1]))
                    for (std::size_t i = 0; i < gout.size(); ++i) (*gb)[i] += gout[i] * xa[i];
                });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double c) {
  Graph& g = *a.graph();
  Array y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= c;
  return g.node(std::move(y), {a},
                [c](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* ga = gg.grad_if_needed(in[0]))
                    kernels::axpy(ga->data(), gout.data(), c, gout.size());
                });
}

Var add_const(Var a, double c) {
  Graph& g = *a.graph();
  Array y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c;
  return g.node(std::move(y), {a},
                [](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* ga = gg.grad_if_needed(in[0]))
                    kernels::axpy(ga->data(), gout.data(), 1.0, gout.size());
                });
}

Var mul_scalarvar(Var x, Var s) {
  Graph& g = same_graph(x, s);
  require_shape(s.value().size() == 1, "mul_scalarvar: scalar operand has size " +
                                           std::to_string(s.value().size()));
  double sv = s.value().item();
  Array y = x.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= sv;
  return g.node(std::move(y), {x, s},
                [](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  const Array& xv = gg.value(in[0]);
                  double sv = gg.value(in[1]).item();
                  if (Array* gx = gg.grad_if_needed(in[0]))
                    kernels::axpy(gx->data(), gout.data(), sv, gout.size());
                  if (Array* gs = gg.grad_if_needed(in[1])) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < gout.size(); ++i) acc += gout[i] * xv[i];
                    (*gs)[0] += acc;
                  }
                });
}

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Array& A = a.value();
  const Array& B = b.value();
  require_shape(A.ndim() == 2 && B.ndim() == 2 && A.cols() == B.rows(),
                "matmul " + shape_str(A) + " * " + shape_str(B));
  std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Array y({m, n});
  kernels::matmul(y.data(), A.data(), B.data(), m, k, n);
  return g.node(std::move(y), {a, b},
                [m, k, n](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  const Array& A = gg.value(in[0]);
                  const Array& B = gg.value(in[1]);
                  if (Array* ga = gg.grad_if_needed(in[0])) {
                    Array t({m, k});
                    kernels::matmul_nt(t.data(), gout.data(), B.data(), m, n, k);
                    kernels::axpy(ga->data(), t.data(), 1.0, t.size());
                  }
                  if (Array* gb = gg.grad_if_needed(in[1])) {
                    Array t({k, n});
                    kernels::matmul_tn(t.data(), A.data(), gout.data(), m, k, n);
                    kernels::axpy(gb->data(), t.data(), 1.0, t.size());
                  }
                });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Array& A = a.value();
  const Array& B = b.value();
  require_shape(A.ndim() == 2 && B.ndim() == 2 && A.cols() == B.cols(),
                "matmul_nt " + shape_str(A) + " * " + shape_str(B) + "^T");
  std::size_t m = A.rows(), k = A.cols(), n = B.rows();
  Array y({m, n});
  kernels::matmul_nt(y.data(), A.data(), B.data(), m, k, n);
  return g.node(std::move(y), {a, b},
                [m, k, n](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  const Array& A = gg.value(in[0]);
                  const Array& B = gg.value(in[1]);
                  if (Array* ga = gg.grad_if_needed(in[0])) {
                    Array t({m, k});
                    kernels::matmul(t.data(), gout.data(), B.data(), m, n, k);
                    kernels::axpy(ga->data(), t.data(), 1.0, t.size());
                  }
                  if (Array* gb = gg.grad_if_needed(in[1])) {
                    Array t({n, k});
                    kernels::matmul_tn(t.data(), gout.data(), A.data(), m, n, k);
                    kernels::axpy(gb->data(), t.data(), 1.0, t.size());
                  }
                });
}

Var linear(Var x, Var w, Var bias) {
  Graph& g = same_graph(x, w);
  const Array& X = x.value();
  const Array& W = w.value();
  const Array& B = bias.value();
  require_shape(X.ndim() == 2 && W.ndim() == 2 && X.cols() == W.cols(),
                "linear x " + shape_str(X) + " w " + shape_str(W));
  require_shape(B.ndim() == 2 && B.rows() == 1 && B.cols() == W.rows(),
                "linear bias " + shape_str(B) + " w " + shape_str(W));
  std::size_t t = X.rows(), din = X.cols(), dout = W.rows();
  Array y({t, dout});
  kernels::matmul_nt(y.data(), X.data(), W.data(), t, din, dout);
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t c = 0; c < dout; ++c) y.at(r, c) += B[c];
  return g.node(std::move(y), {x, w, bias},
                [t, din, dout](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  const Array& X = gg.value(in[0]);
                  const Array& W = gg.value(in[1]);
                  if (Array* gx = gg.grad_if_needed(in[0])) {
                    Array tmp({t, din});
                    kernels::matmul(tmp.data(), gout.data(), W.data(), t, dout, din);
                    kernels::axpy(gx->data(), tmp.data(), 1.0, tmp.size());
                  }
                  if (Array* gw = gg.grad_if_needed(in[1])) {
                    Array tmp({dout, din});
                    kernels::matmul_tn(tmp.data(), gout.data(), X.data(), t, dout, din);
                    kernels::axpy(gw->data(), tmp.data(), 1.0, tmp.size());
                  }
                  if (Array* gb = gg.grad_if_needed(in[2])) {
                    for (std::size_t r = 0; r < t; ++r)
                      for (std::size_t c = 0; c < dout; ++c) (*gb)[c] += gout[r * dout + c];
                  }
                });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Var sigmoid(Var a) {
  return unary(a, stable_sigmoid, [](double x) {
    double s = stable_sigmoid(x);
    return s * (1.0 - s);
  });
}

Var softplus(Var a) {
  return unary(
      a,
      [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      stable_sigmoid);
}

Var gelu(Var a) {
  return unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [](double x) {
        double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        return cdf + x * pdf;
      });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var recip(Var a) {
  return unary(a, [](double x) { return 1.0 / x; },
               [](double x) { return -1.0 / (x * x); });
}

Var layer_norm(Var x, Var gain, Var bias) {
  Graph& g = same_graph(x, gain);
  const Array& X = x.value();
  const std::size_t d = X.cols();
  require_shape(gain.value().ndim() == 2 && gain.value().rows() == 1 && gain.value().cols() == d,
                "layer_norm gain " + shape_str(gain.value()));
  require_shape(bias.value().same_shape(gain.value()), "layer_norm bias");
  const double eps = 1e-5;
  const std::size_t t = X.rows();
  Array y({t, d});
  const Array& gn = gain.value();
  const Array& bs = bias.value();
  for (std::size_t r = 0; r < t; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += X.at(r, c);
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      double dv = X.at(r, c) - mu;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c)
      y.at(r, c) = (X.at(r, c) - mu) * inv * gn[c] + bs[c];
  }
  return g.node(
      std::move(y), {x, gain, bias},
      [t, d, eps](Graph& gg, const Array& gout, const std::vector<int>& in) {
        const Array& X = gg.value(in[0]);
        const Array& gn = gg.value(in[1]);
        Array* gx = gg.grad_if_needed(in[0]);
        Array* gg_gain = gg.grad_if_needed(in[1]);
        Array* gg_bias = gg.grad_if_needed(in[2]);
        std::vector<double> xhat(d);
        for (std::size_t r = 0; r < t; ++r) {
          double mu = 0.0;
          for (std::size_t c = 0; c < d; ++c) mu += X.at(r, c);
          mu /= static_cast<double>(d);
          double var = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            double dv = X.at(r, c) - mu;
            var += dv * dv;
          }
          var /= static_cast<double>(d);
          double inv = 1.0 / std::sqrt(var + eps);
          for (std::size_t c = 0; c < d; ++c) xhat[c] = (X.at(r, c) - mu) * inv;
          if (gg_gain)
            for (std::size_t c = 0; c < d; ++c)
              (*gg_gain)[c] += gout[r * d + c] * xhat[c];
          if (gg_bias)
            for (std::size_t c = 0; c < d; ++c) (*gg_bias)[c] += gout[r * d + c];
          if (gx) {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              double dxh = gout[r * d + c] * gn[c];
              m1 += dxh;
              m2 += dxh * xhat[c];
            }
            m1 /= static_cast<double>(d);
            m2 /= static_cast<double>(d);
            for (std::size_t c = 0; c < d; ++c) {
              double dxh = gout[r * d + c] * gn[c];
              (*gx)[r * d + c] += (dxh - m1 - xhat[c] * m2) * inv;
            }
          }
        }
      });
}

Var log_softmax(Var x) {
  Graph& g = *x.graph();
  const Array& X = x.value();
  const std::size_t t = X.rows(), d = X.cols();
  Array y({t, d});
  for (std::size_t r = 0; r < t; ++r) {
    double mx = X.at(r, 0);
    for (std::size_t c = 1; c < d; ++c) mx = std::max(mx, X.at(r, c));
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) acc += std::exp(X.at(r, c) - mx);
    double lse = mx + std::log(acc);
    for (std::size_t c = 0; c < d; ++c) y.at(r, c) = X.at(r, c) - lse;
  }
  return g.node(std::move(y), {x},
                [t, d](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  Array* gx = gg.grad_if_needed(in[0]);
                  if (!gx) return;
                  // y is this node's value; recover it from the forward pass
                  // via the parent: dx = g - softmax * rowsum(g).
                  const Array& X = gg.value(in[0]);
                  for (std::size_t r = 0; r < t; ++r) {
                    double mx = X.at(r, 0);
                    for (std::size_t c = 1; c < d; ++c) mx = std::max(mx, X.at(r, c));
                    double acc = 0.0;
                    for (std::size_t c = 0; c < d; ++c) acc += std::exp(X.at(r, c) - mx);
                    double lse = mx + std::log(acc);
                    double gsum = 0.0;
                    for (std::size_t c = 0; c < d; ++c) gsum += gout[r * d + c];
                    for (std::size_t c = 0; c < d; ++c)
                      (*gx)[r * d + c] +=
                          gout[r * d + c] - std::exp(X.at(r, c) - lse) * gsum;
                  }
                });
}

Var embedding(Var table, const std::vector<int>& ids) {
  Graph& g = *table.graph();
  const Array& T = table.value();
  const std::size_t d = T.cols();
  for (int id : ids)
    require_shape(id >= 0 && static_cast<std::size_t>(id) < T.rows(),
                  "embedding id " + std::to_string(id) + " out of range for " + shape_str(T));
  Array y({ids.size(), d});
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (std::size_t c = 0; c < d; ++c)
      y.at(r, c) = T.at(static_cast<std::size_t>(ids[r]), c);
  return g.node(std::move(y), {table},
                [ids, d](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* gt = gg.grad_if_needed(in[0])) {
                    for (std::size_t r = 0; r < ids.size(); ++r)
                      for (std::size_t c = 0; c < d; ++c)
                        (*gt)[static_cast<std::size_t>(ids[r]) * d + c] += gout[r * d + c];
                  }
                });
}

Var conv1d_depthwise(Var x, Var kernel, Var bias) {
  Graph& g = same_graph(x, kernel);
  const Array& X = x.value();
  const Array& K = kernel.value();
  const Array& B = bias.value();
  const std::size_t t = X.rows(), ch = X.cols();
  require_shape(K.ndim() == 2 && K.rows() == ch, "conv1d kernel " + shape_str(K) +
                                                     " for input " + shape_str(X));
  const std::size_t ksz = K.cols();
  require_shape(ksz % 2 == 1, "conv1d kernel width must be odd");
  require_shape(B.rows() == 1 && B.cols() == ch, "conv1d bias " + shape_str(B));
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(ksz / 2);
  Array y({t, ch});
  const bool par = t * ch * ksz >= (1u << 15);
#pragma omp parallel for schedule(static) if (par)
  for (long long rr = 0; rr < static_cast<long long>(t); ++rr) {
    const std::size_t r = static_cast<std::size_t>(rr);
    for (std::size_t c = 0; c < ch; ++c) {
      double acc = B[c];
      for (std::size_t j = 0; j < ksz; ++j) {
        std::ptrdiff_t src = static_cast<std::ptrdiff_t>(r) + static_cast<std::ptrdiff_t>(j) - pad;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
        acc += K.at(c, j) * X.at(static_cast<std::size_t>(src), c);
      }
      y.at(r, c) = acc;
    }
  }
  return g.node(
      std::move(y), {x, kernel, bias},
      [t, ch, ksz, pad](Graph& gg, const Array& gout, const std::vector<int>& in) {
        const Array& X = gg.value(in[0]);
        const Array& K = gg.value(in[1]);
        if (Array* gx = gg.grad_if_needed(in[0])) {
          for (std::size_t r = 0; r < t; ++r)
            for (std::size_t c = 0; c < ch; ++c) {
              double acc = 0.0;
              for (std::size_t j = 0; j < ksz; ++j) {
                std::ptrdiff_t dst =
                    static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(j) + pad;
                if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(t)) continue;
                acc += K.at(c, j) * gout[static_cast<std::size_t>(dst) * ch + c];
              }
              (*gx)[r * ch + c] += acc;
            }
        }
        if (Array* gk = gg.grad_if_needed(in[1])) {
          for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t j = 0; j < ksz; ++j) {
              double acc = 0.0;
              for (std::size_t r = 0; r < t; ++r) {
                std::ptrdiff_t src =
                    static_cast<std::ptrdiff_t>(r) + static_cast<std::ptrdiff_t>(j) - pad;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
                acc += gout[r * ch + c] * X.at(static_cast<std::size_t>(src), c);
              }
              (*gk)[c * ksz + j] += acc;
            }
        }
        if (Array* gb = gg.grad_if_needed(in[2])) {
          for (std::size_t r = 0; r < t; ++r)
            for (std::size_t c = 0; c < ch; ++c) (*gb)[c] += gout[r * ch + c];
        }
      });
}

Var subsample(Var x, std::size_t stride) {
  Graph& g = *x.graph();
  require_shape(stride >= 1, "subsample stride must be >= 1");
  const Array& X = x.value();
  const std::size_t t = X.rows(), d = X.cols();
  const std::size_t out = (t + stride - 1) / stride;
  Array y({out, d});
  for (std::size_t r = 0; r < out; ++r)
    for (std::size_t c = 0; c < d; ++c) y.at(r, c) = X.at(r * stride, c);
  return g.node(std::move(y), {x},
                [stride, out, d](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* gx = gg.grad_if_needed(in[0])) {
                    const std::size_t cols = gg.value(in[0]).cols();
                    for (std::size_t r = 0; r < out; ++r)
                      for (std::size_t c = 0; c < d; ++c)
                        (*gx)[(r * stride) * cols + c] += gout[r * d + c];
                  }
                });
}

Var sum(Var x) {
  Graph& g = *x.graph();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.value().size(); ++i) acc += x.value()[i];
  return g.node(Array::scalar(acc), {x},
                [](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* gx = gg.grad_if_needed(in[0]))
                    for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += gout[0];
                });
}

Var mean(Var x) {
  double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Var concat(const std::vector<Var>& xs, int axis) {
  if (xs.empty()) throw Error("concat of zero arrays");
  Graph& g = *xs[0].graph();
  const std::size_t n = xs.size();
  if (axis == 1) {
    std::size_t rows = xs[0].value().rows();
    std::size_t total = 0;
    std::vector<std::size_t> widths(n);
    for (std::size_t i = 0; i < n; ++i) {
      require_shape(xs[i].value().rows() == rows, "concat axis 1: row mismatch");
      widths[i] = xs[i].value().cols();
      total += widths[i];
    }
    Array y({rows, total});
    std::size_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < widths[i]; ++c)
          y.at(r, off + c) = xs[i].value().at(r, c);
      off += widths[i];
    }
    return g.node(std::move(y), xs,
                  [rows, widths, total](Graph& gg, const Array& gout,
                                        const std::vector<int>& in) {
                    std::size_t off = 0;
                    for (std::size_t i = 0; i < in.size(); ++i) {
                      if (Array* gi = gg.grad_if_needed(in[i])) {
                        for (std::size_t r = 0; r < rows; ++r)
                          for (std::size_t c = 0; c < widths[i]; ++c)
                            (*gi)[r * widths[i] + c] += gout[r * total + off + c];
                      }
                      off += widths[i];
                    }
                  });
  }
  if (axis == 0) {
    std::size_t cols = xs[0].value().cols();
    std::size_t total = 0;
    std::vector<std::size_t> heights(n);
    for (std::size_t i = 0; i < n; ++i) {
      require_shape(xs[i].value().cols() == cols, "concat axis 0: column mismatch");
      heights[i] = xs[i].value().rows();
      total += heights[i];
    }
    Array y({total, cols});
    std::size_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < heights[i]; ++r)
        for (std::size_t c = 0; c < cols; ++c) y.at(off + r, c) = xs[i].value().at(r, c);
      off += heights[i];
    }
    return g.node(std::move(y), xs,
                  [cols, heights](Graph& gg, const Array& gout, const std::vector<int>& in) {
                    std::size_t off = 0;
                    for (std::size_t i = 0; i < in.size(); ++i) {
                      if (Array* gi = gg.grad_if_needed(in[i])) {
                        for (std::size_t r = 0; r < heights[i]; ++r)
                          for (std::size_t c = 0; c < cols; ++c)
                            (*gi)[r * cols + c] += gout[(off + r) * cols + c];
                      }
                      off += heights[i];
                    }
                  });
  }
  throw Error("concat: axis must be 0 or 1");
}

std::vector<Var> split_cols(Var x, const std::vector<std::size_t>& widths) {
  Graph& g = *x.graph();
  // Copy: creating the slice nodes below may reallocate the node storage the
  // value reference points into.
  const Array X = x.value();
  std::size_t total = 0;
  for (std::size_t w : widths) total += w;
  require_shape(total == X.cols(), "split_cols widths sum " + std::to_string(total) +
                                       " vs " + shape_str(X));
  std::vector<Var> out;
  std::size_t off = 0;
  const std::size_t rows = X.rows(), cols = X.cols();
  for (std::size_t w : widths) {
    Array y({rows, w});
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) y.at(r, c) = X.at(r, off + c);
    std::size_t o = off;
    out.push_back(g.node(std::move(y), {x},
                         [rows, cols, w, o](Graph& gg, const Array& gout,
                                            const std::vector<int>& in) {
                           if (Array* gx = gg.grad_if_needed(in[0]))
                             for (std::size_t r = 0; r < rows; ++r)
                               for (std::size_t c = 0; c < w; ++c)
                                 (*gx)[r * cols + o + c] += gout[r * w + c];
                         }));
    off += w;
  }
  return out;
}

Var slice_rows(Var x, std::size_t r0, std::size_t r1) {
  Graph& g = *x.graph();
  const Array& X = x.value();
  require_shape(r0 <= r1 && r1 <= X.rows(), "slice_rows range");
  const std::size_t d = X.cols(), n = r1 - r0;
  Array y({n, d});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) y.at(r, c) = X.at(r0 + r, c);
  return g.node(std::move(y), {x},
                [r0, n, d](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* gx = gg.grad_if_needed(in[0]))
                    for (std::size_t r = 0; r < n; ++r)
                      for (std::size_t c = 0; c < d; ++c)
                        (*gx)[(r0 + r) * d + c] += gout[r * d + c];
                });
}

Var repeat_rows(Var x, std::size_t times) {
  Graph& g = *x.graph();
  const Array& X = x.value();
  require_shape(X.rows() == 1, "repeat_rows expects a 1xd input, got " + shape_str(X));
  const std::size_t d = X.cols();
  Array y({times, d});
  for (std::size_t r = 0; r < times; ++r)
    for (std::size_t c = 0; c < d; ++c) y.at(r, c) = X[c];
  return g.node(std::move(y), {x},
                [times, d](Graph& gg, const Array& gout, const std::vector<int>& in) {
                  if (Array* gx = gg.grad_if_needed(in[0]))
                    for (std::size_t r = 0; r < times; ++r)
                      for (std::size_t c = 0; c < d; ++c) (*gx)[c] += gout[r * d + c];
                });
}

Var softmax(Var x) { return exp(log_softmax(x)); }

Var attention(Var q, Var k, Var v, const Array& score_bias) {
  Graph& g = *q.graph();
  const std::size_t d = q.value().cols();
  require_shape(k.value().cols() == d, "attention q/k width mismatch");
  require_shape(k.value().rows() == v.value().rows(), "attention k/v length mismatch");
  require_shape(score_bias.rows() == q.value().rows() && score_bias.cols() == k.value().rows(),
                "attention bias " + shape_str(score_bias));
  Var scores = scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d)));
  scores = add(scores, g.constant(score_bias));
  return matmul(softmax(scores), v);
}

}  // namespace s2st::ad
