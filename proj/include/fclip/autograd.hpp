// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fclip {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// A named trainable tensor. Gradients accumulate into `grad` during
// Tape::backward and are cleared by the optimizer.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool decay = true;

  Parameter() = default;
  Parameter(std::string n, Matrix v, bool apply_decay = true)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())), decay(apply_decay) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recorder. Every op appends a node holding its value and a
// closure that pushes the node's gradient into its inputs.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  // With gradients disabled, param() binds parameters as constants.
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // A free leaf whose gradient is kept on the tape (used by gradient checks).
  Var leaf(Matrix value);
  // A leaf bound to a parameter; backward accumulates into `param.grad`.
  Var param(Parameter& param);

  // Records an op result. `inputs` are only used to decide whether the node
  // needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backprop backprop);
  Var record(Matrix value, std::span<const Var> inputs, Backprop backprop);

  // Seeds d(root)/d(root) = 1 and propagates. Root must be 1x1.
  void backward(Var root);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Adds `g` into the gradient of node `id` if it tracks one.
  void accumulate(std::size_t id, const Matrix& g);
  void accumulate(Var v, const Matrix& g) { accumulate(v.id(), g); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backprop backprop;
    Parameter* param = nullptr;
  };

  // deque keeps value references stable while new nodes are appended.
  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
};

namespace ag {

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// Adds a 1xC row to every row of a.
Var add_row(Var a, Var row);
Var scale(Var a, double c);
// s is 1x1.
Var mul_scalar(Var a, Var s);
Var exp(Var a);
Var relu(Var a);
Var tanh(Var a);
Var l2_normalize_rows(Var a);
Var softmax_rows(Var a);
// -(1/B) sum_ij G_ij log softmax_row(S)_ij with row-max subtraction. G is a
// constant B x C target matrix.
Var soft_cross_entropy(Var logits, const Matrix& targets);
// Mean squared error over all elements.
Var mse(Var a, Var b);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
// Row i of the result is the mean of the rows of `a` with group[i'] == i.
Var segment_mean_rows(Var a, std::span<const int> group, int num_groups);
// (n*k) x c -> n x (k*c): rows n*k .. n*k+k-1 laid side by side.
Var regroup_rows(Var a, int k);
Var detach(Var a);
Var sum(Var a);

}  // namespace ag

// Numerically stable row-wise log-softmax on plain matrices.
Matrix log_softmax_rows(const Matrix& logits);
Matrix softmax_rows(const Matrix& logits);
Matrix l2_normalize_rows(const Matrix& m);

}  // namespace fclip
