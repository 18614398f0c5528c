#pragma once

#include <cstddef>
#include <vector>

#include "s2st/core/graph.hpp"

namespace s2st::ctc {

using s2st::Array;
using s2st::ad::Graph;
using s2st::ad::Var;

/// Blank occupies lattice column 0; labels use 1..V.
constexpr int kBlank = 0;

/// Log-probability lattice (T x V+1, log-softmax-normalized rows) paired with
/// a label sequence.
struct CtcInstance {
  Array lattice;
  std::vector<int> labels;
};

/// Throws InvalidLabelError if a label is the blank index or out of range;
/// ShapeError if the lattice is not T x (V+1); Error if a frame's
/// probabilities do not sum to 1 within 1e-9.
void validate_instance(const Array& lattice, const std::vector<int>& labels);

/// Frames needed for a finite loss: label length plus adjacent repeats.
std::size_t min_frames(const std::vector<int>& labels);

/// Negative log-likelihood via the log-space forward recursion. Infeasible
/// label/length combinations return +infinity (not an exception). Labels must
/// be nonempty and blank-free.
double ctc_loss_value(const Array& lattice, const std::vector<int>& labels);

/// Differentiable version: records a node whose backward uses the
/// forward-backward posterior. Gradient is zero for an infeasible instance.
Var ctc_loss(Graph& g, Var lattice, const std::vector<int>& labels);

/// Exhaustive oracle: enumerates every length-T path, collapses repeats,
/// removes blanks, and sums the probability of paths that collapse to the
/// label. Accepts the empty label (paths of all blanks). Throws SizeError when
/// (V+1)^T > 1e6.
double ctc_brute_force(const Array& lattice, const std::vector<int>& labels);

/// Per-frame argmax, collapse repeats, strip blanks.
std::vector<int> greedy_decode(const Array& lattice);

}  // namespace s2st::ctc
