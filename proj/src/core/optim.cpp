#include "s2st/core/optim.hpp"

#include <cmath>

namespace s2st::ad {

void Adam::step(const std::vector<Param*>& params) {
  for (Param* p : params) {
    if (!p->trainable) continue;
    State& st = state_[p];
    if (st.m.empty()) {
      st.m = Array::zeros_like(p->value);
      st.v = Array::zeros_like(p->value);
    }
    st.t += 1;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(st.t));
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double g = p->grad[i];
      st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * g;
      st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * g * g;
      double mhat = st.m[i] / bc1;
      double vhat = st.v[i] / bc2;
      p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace s2st::ad
