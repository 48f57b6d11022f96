// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/autograd.hpp"

#include <cassert>
#include <cmath>

#include "qcnet/error.hpp"

namespace qcnet {

BatchNormParams::BatchNormParams(const std::string& name, Eigen::Index width)
    : gamma(name + ".gamma", 1, width),
      beta(name + ".beta", 1, width),
      running_mean(Matrix::Zero(1, width)),
      running_var(Matrix::Ones(1, width)) {
  gamma.value.setOnes();
}

LayerNormParams::LayerNormParams(const std::string& name, Eigen::Index width)
    : gamma(name + ".gamma", 1, width), beta(name + ".beta", 1, width) {
  gamma.value.setOnes();
}

namespace ad {

namespace {

double sigmoid_scalar(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::push(Matrix value, bool requires_grad) {
  auto node = std::make_unique<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return nodes_.back().get();
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }

Var Tape::param(Param& p) {
  Var v = push(p.value, true);
  v->param = &p;
  return v;
}

Var Tape::linear(Var x, LinearParams& p) {
  Var w = param(p.weight);
  Var b = p.has_bias() ? param(p.bias) : nullptr;
  Matrix y = x->value * w->value.transpose();
  if (b) y.rowwise() += b->value.row(0);
  Var out = push(std::move(y), true);
  out->backward = [x, w, b](Node& self) {
    w->ensure_grad().noalias() += self.grad.transpose() * x->value;
    if (b) b->ensure_grad() += self.grad.colwise().sum();
    if (x->requires_grad) x->ensure_grad().noalias() += self.grad * w->value;
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  assert(a->value.rows() == b->value.rows() && a->value.cols() == b->value.cols());
  Var out = push(a->value + b->value, a->requires_grad || b->requires_grad);
  out->backward = [a, b](Node& self) {
    if (a->requires_grad) a->ensure_grad() += self.grad;
    if (b->requires_grad) b->ensure_grad() += self.grad;
  };
  return out;
}

Var Tape::hadamard(Var a, Var b) {
  Var out = push(a->value.cwiseProduct(b->value), a->requires_grad || b->requires_grad);
  out->backward = [a, b](Node& self) {
    if (a->requires_grad) a->ensure_grad() += self.grad.cwiseProduct(b->value);
    if (b->requires_grad) b->ensure_grad() += self.grad.cwiseProduct(a->value);
  };
  return out;
}

Var Tape::scale(Var a, double c) {
  Var out = push(a->value * c, a->requires_grad);
  out->backward = [a, c](Node& self) {
    if (a->requires_grad) a->ensure_grad() += self.grad * c;
  };
  return out;
}

Var Tape::concat_cols(Var a, Var b) {
  const Eigen::Index rows = a->value.rows();
  const Eigen::Index ca = a->value.cols();
  const Eigen::Index cb = b->value.cols();
  Matrix y(rows, ca + cb);
  y.leftCols(ca) = a->value;
  y.rightCols(cb) = b->value;
  Var out = push(std::move(y), a->requires_grad || b->requires_grad);
  out->backward = [a, b, ca, cb](Node& self) {
    if (a->requires_grad) a->ensure_grad() += self.grad.leftCols(ca);
    if (b->requires_grad) b->ensure_grad() += self.grad.rightCols(cb);
  };
  return out;
}

Var Tape::gather_rows(Var x, std::span<const int> index) {
  Matrix y(static_cast<Eigen::Index>(index.size()), x->value.cols());
  for (std::size_t i = 0; i < index.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = x->value.row(index[i]);
  Var out = push(std::move(y), x->requires_grad);
  std::vector<int> idx(index.begin(), index.end());
  out->backward = [x, idx = std::move(idx)](Node& self) {
    if (!x->requires_grad) return;
    Matrix& g = x->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
  };
  return out;
}

Var Tape::scatter_add_rows(Var x, std::span<const int> index, Eigen::Index rows) {
  Matrix y = Matrix::Zero(rows, x->value.cols());
  for (std::size_t i = 0; i < index.size(); ++i) y.row(index[i]) += x->value.row(static_cast<Eigen::Index>(i));
  Var out = push(std::move(y), x->requires_grad);
  std::vector<int> idx(index.begin(), index.end());
  out->backward = [x, idx = std::move(idx)](Node& self) {
    if (!x->requires_grad) return;
    Matrix& g = x->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(static_cast<Eigen::Index>(i)) += self.grad.row(idx[i]);
  };
  return out;
}

Var Tape::segment_mean(Var x, std::span<const int> segment, Eigen::Index segments) {
  std::vector<double> counts(static_cast<std::size_t>(segments), 0.0);
  for (int s : segment) counts[static_cast<std::size_t>(s)] += 1.0;
  Matrix y = Matrix::Zero(segments, x->value.cols());
  for (std::size_t i = 0; i < segment.size(); ++i) y.row(segment[i]) += x->value.row(static_cast<Eigen::Index>(i));
  for (Eigen::Index s = 0; s < segments; ++s) {
    if (counts[static_cast<std::size_t>(s)] > 0) y.row(s) /= counts[static_cast<std::size_t>(s)];
  }
  Var out = push(std::move(y), x->requires_grad);
  std::vector<int> seg(segment.begin(), segment.end());
  out->backward = [x, seg = std::move(seg), counts = std::move(counts)](Node& self) {
    if (!x->requires_grad) return;
    Matrix& g = x->ensure_grad();
    for (std::size_t i = 0; i < seg.size(); ++i) {
      g.row(static_cast<Eigen::Index>(i)) += self.grad.row(seg[i]) / counts[static_cast<std::size_t>(seg[i])];
    }
  };
  return out;
}

Var Tape::sigmoid(Var x) {
  Var out = push(x->value.unaryExpr(&sigmoid_scalar), x->requires_grad);
  out->backward = [x](Node& self) {
    if (!x->requires_grad) return;
    x->ensure_grad() += self.grad.cwiseProduct(
        self.value.unaryExpr([](double s) { return s * (1.0 - s); }));
  };
  return out;
}

Var Tape::silu(Var x) {
  Var out = push(x->value.unaryExpr([](double v) { return v * sigmoid_scalar(v); }), x->requires_grad);
  out->backward = [x](Node& self) {
    if (!x->requires_grad) return;
    x->ensure_grad() += self.grad.cwiseProduct(x->value.unaryExpr([](double v) {
      const double s = sigmoid_scalar(v);
      return s * (1.0 + v * (1.0 - s));
    }));
  };
  return out;
}

Var Tape::batch_norm(Var x, BatchNormParams& p, bool training) {
  Var gamma = param(p.gamma);
  Var beta = param(p.beta);
  const Eigen::Index n = x->value.rows();
  const Eigen::Index c = x->value.cols();
  if (n == 0) return push(Matrix(0, c), true);

  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd var;
  if (training) {
    mean = x->value.colwise().mean();
    var = (x->value.rowwise() - mean).array().square().colwise().mean();
    pending_.push_back({&p, mean, var});
  } else {
    mean = p.running_mean.row(0);
    var = p.running_var.row(0);
  }
  const Eigen::RowVectorXd inv_std = (var.array() + kNormEpsilon).rsqrt();
  Matrix xhat = (x->value.rowwise() - mean).array().rowwise() * inv_std.array();
  Matrix y = (xhat.array().rowwise() * gamma->value.row(0).array()).rowwise() + beta->value.row(0).array();
  Var out = push(std::move(y), true);
  out->backward = [x, gamma, beta, xhat = std::move(xhat), inv_std, training, n](Node& self) {
    gamma->ensure_grad() += self.grad.cwiseProduct(xhat).colwise().sum();
    beta->ensure_grad() += self.grad.colwise().sum();
    if (!x->requires_grad) return;
    Matrix dxhat = self.grad.array().rowwise() * gamma->value.row(0).array();
    if (!training) {
      x->ensure_grad() += Matrix(dxhat.array().rowwise() * inv_std.array());
      return;
    }
    const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
    const Eigen::RowVectorXd sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix dx = (dxhat.rowwise() - sum_d * inv_n) - (xhat.array().rowwise() * (sum_dx * inv_n).array()).matrix();
    x->ensure_grad() += Matrix(dx.array().rowwise() * inv_std.array());
  };
  return out;
}

Var Tape::layer_norm(Var x, LayerNormParams& p) {
  Var gamma = param(p.gamma);
  Var beta = param(p.beta);
  const Eigen::Index c = x->value.cols();
  const Eigen::VectorXd mean = x->value.rowwise().mean();
  Matrix centered = x->value.colwise() - mean;
  const Eigen::VectorXd inv_std =
      (centered.array().square().rowwise().mean() + kNormEpsilon).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = (xhat.array().rowwise() * gamma->value.row(0).array()).rowwise() + beta->value.row(0).array();
  Var out = push(std::move(y), true);
  out->backward = [x, gamma, beta, xhat = std::move(xhat), inv_std, c](Node& self) {
    gamma->ensure_grad() += self.grad.cwiseProduct(xhat).colwise().sum();
    beta->ensure_grad() += self.grad.colwise().sum();
    if (!x->requires_grad) return;
    Matrix dxhat = self.grad.array().rowwise() * gamma->value.row(0).array();
    const double inv_c = 1.0 / static_cast<double>(c);
    const Eigen::VectorXd sum_d = dxhat.rowwise().sum();
    const Eigen::VectorXd sum_dx = dxhat.cwiseProduct(xhat).rowwise().sum();
    Matrix dx = (dxhat.colwise() - sum_d * inv_c) - (xhat.array().colwise() * (sum_dx * inv_c).array()).matrix();
    x->ensure_grad() += Matrix(dx.array().colwise() * inv_std.array());
  };
  return out;
}

Var Tape::mse(Var pred, std::span<const double> target) {
  const Eigen::Index n = pred->value.rows();
  Eigen::VectorXd diff(n);
  for (Eigen::Index i = 0; i < n; ++i) diff[i] = pred->value(i, 0) - target[static_cast<std::size_t>(i)];
  Matrix y(1, 1);
  y(0, 0) = diff.squaredNorm() / static_cast<double>(n);
  Var out = push(std::move(y), pred->requires_grad);
  out->backward = [pred, diff, n](Node& self) {
    if (!pred->requires_grad) return;
    pred->ensure_grad().col(0) += diff * (2.0 * self.grad(0, 0) / static_cast<double>(n));
  };
  return out;
}

Var Tape::mae(Var pred, std::span<const double> target) {
  const Eigen::Index n = pred->value.rows();
  Eigen::VectorXd diff(n);
  for (Eigen::Index i = 0; i < n; ++i) diff[i] = pred->value(i, 0) - target[static_cast<std::size_t>(i)];
  Matrix y(1, 1);
  y(0, 0) = diff.cwiseAbs().sum() / static_cast<double>(n);
  Var out = push(std::move(y), pred->requires_grad);
  out->backward = [pred, diff, n](Node& self) {
    if (!pred->requires_grad) return;
    const Eigen::VectorXd sign = diff.unaryExpr([](double d) { return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0); });
    pred->ensure_grad().col(0) += sign * (self.grad(0, 0) / static_cast<double>(n));
  };
  return out;
}

void Tape::backward(Var root) {
  if (root->value.rows() != 1 || root->value.cols() != 1) {
    throw Error(ErrorKind::InvalidArgument, "backward needs a scalar root");
  }
  root->ensure_grad()(0, 0) = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& node = **it;
    if (node.grad.size() == 0) continue;
    if (node.backward) node.backward(node);
    if (node.param) {
      if (node.param->grad.size() != node.param->value.size()) node.param->zero_grad();
      node.param->grad += node.grad;
    }
  }
}

void Tape::commit_running_stats() {
  for (auto& s : pending_) {
    s.params->running_mean = (1.0 - kBatchNormMomentum) * s.params->running_mean + kBatchNormMomentum * s.mean;
    s.params->running_var = (1.0 - kBatchNormMomentum) * s.params->running_var + kBatchNormMomentum * s.var;
  }
  pending_.clear();
}

}  // namespace ad
}  // namespace qcnet
