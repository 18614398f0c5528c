#pragma once

#include <functional>

#include "s2st/core/graph.hpp"

namespace s2st::ad {

/// Central-difference gradient check for a scalar-valued function of one
/// array. Builds a fresh graph per evaluation; returns the max over
/// coordinates of |analytic - central| / max(1, |analytic|).
/// Throws Error when f(x) is not finite.
double grad_check(const std::function<Var(Graph&, Var)>& f, const Array& x, double h = 1e-5);

/// Same check against a named parameter: f must rebuild the scalar forward
/// pass on the given graph, reading p via Graph::use(p, true). p.value is
/// restored afterwards.
double grad_check_param(Param& p, const std::function<Var(Graph&)>& f, double h = 1e-5);

}  // namespace s2st::ad
