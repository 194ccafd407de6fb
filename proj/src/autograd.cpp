// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "fclip/errors.hpp"

namespace fclip {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("Var::scalar on a non-scalar node");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Matrix value) {
  Matrix g = Matrix::Zero(value.rows(), value.cols());
  nodes_.push_back(Node{std::move(value), std::move(g), true, nullptr, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  if (!grad_enabled_) return constant(p.value);
  Var v = leaf(p.value);
  nodes_.back().param = &p;
  return v;
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backprop backprop) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backprop));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backprop backprop) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
  Node n;
  n.value = std::move(value);
  if (needs) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.requires_grad = true;
    n.backprop = std::move(backprop);
  }
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (g.rows() != n.grad.rows() || g.cols() != n.grad.cols()) throw ShapeError("gradient shape mismatch");
  n.grad += g;
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw InvalidArgument("backward: variable belongs to another tape");
  Node& r = nodes_[root.id_];
  if (r.value.rows() != 1 || r.value.cols() != 1) throw ShapeError("backward root must be a scalar");
  if (!r.requires_grad) return;
  r.grad(0, 0) += 1.0;
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backprop) n.backprop(*this, i);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                     ")");
  }
}

constexpr double kNormFloor = 1e-12;

}  // namespace

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) { return log_softmax_rows(logits).array().exp().matrix(); }

Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) /= std::max(m.row(i).norm(), kNormFloor);
  return out;
}

namespace ag {

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var matmul_nt(Var a, Var b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: column counts differ");
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value() * b.value().transpose(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib));
    if (t.requires_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
  });
}

Var transpose(Var a) {
  const auto ia = a.id();
  return a.tape().record(a.value().transpose(), {a},
                         [ia](Tape& t, std::size_t self) { t.accumulate(ia, t.grad(self).transpose()); });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: bias must be 1 x cols");
  const auto ia = a.id(), ir = row.id();
  Matrix v = a.value();
  v.rowwise() += row.value().row(0);
  return a.tape().record(std::move(v), {a, row}, [ia, ir](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    if (t.requires_grad(ir)) t.accumulate(ir, t.grad(self).colwise().sum());
  });
}

Var scale(Var a, double c) {
  const auto ia = a.id();
  return a.tape().record(a.value() * c, {a}, [ia, c](Tape& t, std::size_t self) { t.accumulate(ia, t.grad(self) * c); });
}

Var mul_scalar(Var a, Var s) {
  if (s.rows() != 1 || s.cols() != 1) throw ShapeError("mul_scalar: scale must be 1x1");
  const auto ia = a.id(), is = s.id();
  return a.tape().record(a.value() * s.scalar(), {a, s}, [ia, is](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(is)(0, 0));
    if (t.requires_grad(is)) {
      Matrix gs(1, 1);
      gs(0, 0) = g.cwiseProduct(t.value(ia)).sum();
      t.accumulate(is, gs);
    }
  });
}

Var exp(Var a) {
  const auto ia = a.id();
  Matrix v = a.value().array().exp().matrix();
  return a.tape().record(std::move(v), {a}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self).cwiseProduct(t.value(self)));
  });
}

Var relu(Var a) {
  const auto ia = a.id();
  return a.tape().record(a.value().cwiseMax(0.0), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix mask = (t.value(ia).array() > 0.0).cast<double>().matrix();
    t.accumulate(ia, t.grad(self).cwiseProduct(mask));
  });
}

Var tanh(Var a) {
  const auto ia = a.id();
  return a.tape().record(a.value().array().tanh().matrix(), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& y = t.value(self);
    t.accumulate(ia, t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var l2_normalize_rows(Var a) {
  const auto ia = a.id();
  return a.tape().record(fclip::l2_normalize_rows(a.value()), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& x = t.value(ia);
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Matrix dx(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double n = std::max(x.row(i).norm(), kNormFloor);
      dx.row(i) = (g.row(i) - y.row(i) * y.row(i).dot(g.row(i))) / n;
    }
    t.accumulate(ia, dx);
  });
}

Var softmax_rows(Var a) {
  const auto ia = a.id();
  return a.tape().record(fclip::softmax_rows(a.value()), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    const Eigen::VectorXd inner = g.cwiseProduct(y).rowwise().sum();
    Matrix dx = y.cwiseProduct(g - inner.replicate(1, g.cols()));
    t.accumulate(ia, dx);
  });
}

Var soft_cross_entropy(Var logits, const Matrix& targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols()) {
    throw ShapeError("soft_cross_entropy: logits and targets differ in shape");
  }
  if (logits.rows() == 0) throw ShapeError("soft_cross_entropy: empty batch");
  const auto il = logits.id();
  const Matrix logp = log_softmax_rows(logits.value());
  const double b = static_cast<double>(logits.rows());
  Matrix v(1, 1);
  v(0, 0) = -targets.cwiseProduct(logp).sum() / b;
  return logits.tape().record(std::move(v), {logits}, [il, targets, logp, b](Tape& t, std::size_t self) {
    const double g = t.grad(self)(0, 0);
    const Eigen::VectorXd mass = targets.rowwise().sum();
    Matrix d = logp.array().exp().matrix();
    for (Eigen::Index i = 0; i < d.rows(); ++i) d.row(i) *= mass(i);
    d -= targets;
    t.accumulate(il, d * (g / b));
  });
}

Var mse(Var a, Var b) {
  require_same_shape(a, b, "mse");
  if (a.value().size() == 0) throw ShapeError("mse: empty input");
  const auto ia = a.id(), ib = b.id();
  const double n = static_cast<double>(a.value().size());
  Matrix v(1, 1);
  v(0, 0) = (a.value() - b.value()).squaredNorm() / n;
  return a.tape().record(std::move(v), {a, b}, [ia, ib, n](Tape& t, std::size_t self) {
    const Matrix d = (t.value(ia) - t.value(ib)) * (2.0 * t.grad(self)(0, 0) / n);
    t.accumulate(ia, d);
    t.accumulate(ib, -d);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix v(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p.value();
    layout.emplace_back(p.id(), at);
    at += p.cols();
  }
  return parts.front().tape().record(std::move(v), parts, [layout](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    for (const auto& [id, start] : layout) {
      if (t.requires_grad(id)) t.accumulate(id, g.middleCols(start, t.value(id).cols()));
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
  const auto ia = a.id();
  return a.tape().record(a.value().middleCols(start, count), {a}, [ia, start, count](Tape& t, std::size_t self) {
    Matrix d = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
    d.middleCols(start, count) = t.grad(self);
    t.accumulate(ia, d);
  });
}

Var segment_mean_rows(Var a, std::span<const int> group, int num_groups) {
  if (static_cast<Eigen::Index>(group.size()) != a.rows()) throw ShapeError("segment_mean_rows: group size");
  std::vector<double> counts(static_cast<std::size_t>(num_groups), 0.0);
  for (int g : group) {
    if (g < 0 || g >= num_groups) throw ShapeError("segment_mean_rows: group id out of range");
    counts[static_cast<std::size_t>(g)] += 1.0;
  }
  Matrix v = Matrix::Zero(num_groups, a.cols());
  for (std::size_t r = 0; r < group.size(); ++r) v.row(group[r]) += a.value().row(static_cast<Eigen::Index>(r));
  for (int g = 0; g < num_groups; ++g) {
    if (counts[static_cast<std::size_t>(g)] > 0) v.row(g) /= counts[static_cast<std::size_t>(g)];
  }
  std::vector<int> groups(group.begin(), group.end());
  const auto ia = a.id();
  return a.tape().record(std::move(v), {a}, [ia, groups, counts](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix d(static_cast<Eigen::Index>(groups.size()), g.cols());
    for (std::size_t r = 0; r < groups.size(); ++r) {
      d.row(static_cast<Eigen::Index>(r)) = g.row(groups[r]) / counts[static_cast<std::size_t>(groups[r])];
    }
    t.accumulate(ia, d);
  });
}

Var regroup_rows(Var a, int k) {
  if (k <= 0 || a.rows() % k != 0) throw ShapeError("regroup_rows: rows not divisible by k");
  const Eigen::Index n = a.rows() / k;
  const Eigen::Index c = a.cols();
  Matrix v(n, k * c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) v.block(i, j * c, 1, c) = a.value().row(i * k + j);
  }
  const auto ia = a.id();
  return a.tape().record(std::move(v), {a}, [ia, k, n, c](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix d(n * k, c);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) d.row(i * k + j) = g.block(i, j * c, 1, c);
    }
    t.accumulate(ia, d);
  });
}

Var detach(Var a) { return a.tape().constant(a.value()); }

Var sum(Var a) {
  const auto ia = a.id();
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return a.tape().record(std::move(v), {a}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, Matrix::Constant(t.value(ia).rows(), t.value(ia).cols(), t.grad(self)(0, 0)));
  });
}

}  // namespace ag
}  // namespace fclip
