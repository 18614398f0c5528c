#include "s2st/core/grad_check.hpp"

#include <cmath>

#include "s2st/error.hpp"

namespace s2st::ad {

double grad_check(const std::function<Var(Graph&, Var)>& f, const Array& x, double h) {
  Array analytic;
  {
    Graph g;
    Var vx = g.input(x, true);
    Var y = f(g, vx);
    if (y.value().size() != 1) throw Error("grad_check: f must be scalar-valued");
    if (!y.value().all_finite()) throw Error("grad_check: f(x) is not finite");
    g.backward(y);
    analytic = vx.grad();
    if (analytic.empty()) analytic = Array::zeros_like(x);
  }
  auto eval = [&](const Array& xp) {
    Graph g;
    Var y = f(g, g.input(xp, false));
    return y.value().item();
  };
  double max_rel = 0.0;
  Array xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = xp[i];
    xp[i] = orig + h;
    double fp = eval(xp);
    xp[i] = orig - h;
    double fm = eval(xp);
    xp[i] = orig;
    double fd = (fp - fm) / (2.0 * h);
    double rel = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

double grad_check_param(Param& p, const std::function<Var(Graph&)>& f, double h) {
  Array analytic;
  {
    p.zero_grad();
    Graph g;
    Var y = f(g);
    if (y.value().size() != 1) throw Error("grad_check_param: f must be scalar-valued");
    if (!y.value().all_finite()) throw Error("grad_check_param: f() is not finite");
    g.backward(y);
    g.accumulate_param_grads(1.0);
    analytic = p.grad;
  }
  auto eval = [&] {
    Graph g;
    return f(g).value().item();
  };
  const Array saved = p.value;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    double orig = saved[i];
    p.value[i] = orig + h;
    double fp = eval();
    p.value[i] = orig - h;
    double fm = eval();
    p.value[i] = orig;
    double fd = (fp - fm) / (2.0 * h);
    double rel = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    max_rel = std::max(max_rel, rel);
  }
  p.value = saved;
  p.zero_grad();
  return max_rel;
}

}  // namespace s2st::ad
