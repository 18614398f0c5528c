#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "s2st/core/graph.hpp"

namespace s2st::ad {

/// Adam with fixed hyperparameters; update order follows the caller's param
/// list so steps are deterministic.
class Adam {
 public:
  explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Param*>& params);

 private:
  struct State {
    Array m, v;
    long t = 0;
  };
  double lr_, beta1_, beta2_, eps_;
  std::unordered_map<Param*, State> state_;
};

}  // namespace s2st::ad
