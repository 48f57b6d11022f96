// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qcnet/param.hpp"

namespace qcnet {

struct BatchNormParams {
  Param gamma;
  Param beta;
  Matrix running_mean;
  Matrix running_var;

  BatchNormParams() = default;
  BatchNormParams(const std::string& name, Eigen::Index width);
};

struct LayerNormParams {
  Param gamma;
  Param beta;

  LayerNormParams() = default;
  LayerNormParams(const std::string& name, Eigen::Index width);
};

inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

namespace ad {

/// One value in the recorded computation. `backward` pushes this node's grad
/// into its inputs; it is empty for leaves.
struct Node {
  Matrix value;
  Matrix grad;
  std::function<void(Node&)> backward;
  Param* param = nullptr;
  bool requires_grad = false;

  Matrix& ensure_grad() {
    if (grad.size() != value.size()) grad = Matrix::Zero(value.rows(), value.cols());
    return grad;
  }
};

using Var = Node*;

/// Reverse-mode recorder. Nodes live as long as the tape; ops are recorded in
/// creation order, which is a valid topological order for the reverse sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(Param& p);

  Var linear(Var x, LinearParams& p);
  Var add(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double c);
  Var concat_cols(Var a, Var b);
  Var gather_rows(Var x, std::span<const int> index);
  Var scatter_add_rows(Var x, std::span<const int> index, Eigen::Index rows);
  /// Mean of the rows sharing a segment id; empty segments yield zero rows.
  Var segment_mean(Var x, std::span<const int> segment, Eigen::Index segments);
  Var sigmoid(Var x);
  Var silu(Var x);
  /// Column-wise normalization over the rows. Training mode uses the batch
  /// statistics (biased variance) and queues a running-stat update.
  Var batch_norm(Var x, BatchNormParams& p, bool training);
  /// Row-wise normalization over the feature axis.
  Var layer_norm(Var x, LayerNormParams& p);
  /// Mean squared / absolute error between an N x 1 prediction and targets.
  Var mse(Var pred, std::span<const double> target);
  Var mae(Var pred, std::span<const double> target);

  /// Seeds d(root)/d(root) = 1 for a 1 x 1 root and accumulates into Param::grad.
  void backward(Var root);

  /// Applies queued running-statistic updates (momentum kBatchNormMomentum).
  void commit_running_stats();

  std::size_t size() const { return nodes_.size(); }

 private:
  struct PendingStat {
    BatchNormParams* params;
    Matrix mean;
    Matrix var;
  };

  Var push(Matrix value, bool requires_grad);

  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<PendingStat> pending_;
};

}  // namespace ad
}  // namespace qcnet
