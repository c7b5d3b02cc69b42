#pragma once

#include <span>
#include <vector>

#include "symfore/tensor.hpp"

namespace symfore::ad {

// All ops run eagerly and register their backward on the tape when any input
// is tracked. Inputs are never mutated; every op returns a fresh tensor.

// [m x k] * [k x n] -> [m x n]
TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// elementwise a + b; b may also broadcast as a [1 x n] row or [m x 1] column
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& x, double c);
TensorPtr add_scalar(Tape& tape, const TensorPtr& x, double c);

TensorPtr relu(Tape& tape, const TensorPtr& x);
TensorPtr sigmoid(Tape& tape, const TensorPtr& x);
TensorPtr tanh(Tape& tape, const TensorPtr& x);

// softmax over the last axis, computed with max subtraction
TensorPtr softmax(Tape& tape, const TensorPtr& x);

// x: [C_in x T], w: [C_out x C_in x K]; output frame t sees inputs <= t only
// (left padding of (K-1)*dilation implicit zeros).
TensorPtr dilated_causal_conv1d(Tape& tape, const TensorPtr& x, const TensorPtr& w, int dilation);

// weight-normalized kernel: w[o] = g[o] * v[o] / ||v[o]|| per output channel
TensorPtr weight_norm_conv(Tape& tape, const TensorPtr& v, const TensorPtr& g);

TensorPtr transpose(Tape& tape, const TensorPtr& x);

// axis 0 stacks rows, axis 1 stacks columns; backward splits the gradient
TensorPtr concat(Tape& tape, const TensorPtr& a, const TensorPtr& b, int axis);
TensorPtr vstack(Tape& tape, const std::vector<TensorPtr>& parts);

// row slice [r0, r1)
TensorPtr rows(Tape& tape, const TensorPtr& x, std::size_t r0, std::size_t r1);

TensorPtr sum(Tape& tape, const TensorPtr& x);

// mean over frames of -log(pred[frame, target[frame]]), probabilities clamped
// below at 1e-12 before the log
TensorPtr cross_entropy(Tape& tape, const TensorPtr& pred_probs, std::span<const int> targets);

// mean over frames and joints of the per-joint Euclidean distance; columns are
// consumed as consecutive (x, y, z) triples
TensorPtr l2_pose_loss(Tape& tape, const TensorPtr& pred, const TensorPtr& target);

// ---- non-differentiable helpers ----

TensorPtr one_hot(int id, int n);                 // [1 x n] row
std::size_t argmax_row(const Tensor& x, std::size_t row);  // ties -> lowest index
std::vector<int> argmax_rows(const Tensor& x);

constexpr double kLogClamp = 1e-12;

}  // namespace symfore::ad
