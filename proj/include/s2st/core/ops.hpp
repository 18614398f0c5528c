#pragma once

#include <cstddef>
#include <vector>

#include "s2st/core/graph.hpp"

namespace s2st::ad {

// Elementwise (same shape).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var neg(Var a);
Var scale(Var a, double c);      // c * a
Var add_const(Var a, double c);  // a + c, elementwise

// x (any shape) times a 1x1 scalar node: y = x * s.
Var mul_scalarvar(Var x, Var s);

// Matrix products. a (m x k), b (k x n) -> m x n; the _nt form takes b (n x k).
Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);

// x (T x d_in), w (d_out x d_in), bias (1 x d_out) -> (T x d_out).
Var linear(Var x, Var w, Var bias);

// Elementwise nonlinearities. gelu is the exact erf form.
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var gelu(Var a);
Var exp(Var a);
Var recip(Var a);

// Per-row layer normalization with affine gain/bias (1 x d). eps = 1e-5.
Var layer_norm(Var x, Var gain, Var bias);

// Per-row log-softmax.
Var log_softmax(Var x);

// Row gather from an (R x d) table; backward scatter-adds.
Var embedding(Var table, const std::vector<int>& ids);

// x (T x C), kernel (C x K) odd K, bias (1 x C); same-length zero padding.
Var conv1d_depthwise(Var x, Var kernel, Var bias);

// Keeps rows 0, s, 2s, ...
Var subsample(Var x, std::size_t stride);

Var sum(Var x);   // -> 1x1
Var mean(Var x);  // -> 1x1

// axis 0 stacks rows, axis 1 stacks columns.
Var concat(const std::vector<Var>& xs, int axis);
std::vector<Var> split_cols(Var x, const std::vector<std::size_t>& widths);
Var slice_rows(Var x, std::size_t r0, std::size_t r1);
Var repeat_rows(Var x, std::size_t times);  // x (1 x d) -> (times x d)

// exp(log_softmax(x)): numerically stable per-row softmax.
Var softmax(Var x);

// Single-head scaled dot-product attention. q,k,v are (Tq x d), (Tk x d),
// (Tk x dv); score_bias (Tq x Tk) is added to the scaled scores (use large
// negative entries to mask).
Var attention(Var q, Var k, Var v, const Array& score_bias);

}  // namespace s2st::ad
