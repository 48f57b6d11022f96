// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <Eigen/Core>
#include <string>

namespace qcnet {

/// Row-major so that a row is one simplex / one sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A learnable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// y = x W^T + b with W: out x in, b: 1 x out.
struct LinearParams {
  Param weight;
  Param bias;

  LinearParams() = default;
  LinearParams(const std::string& name, Eigen::Index in, Eigen::Index out, bool with_bias = true)
      : weight(name + ".weight", out, in), bias(name + ".bias", with_bias ? 1 : 0, out) {}

  Eigen::Index in_features() const { return weight.value.cols(); }
  Eigen::Index out_features() const { return weight.value.rows(); }
  bool has_bias() const { return bias.value.size() > 0; }

  Matrix apply(const Matrix& x) const {
    Matrix y = x * weight.value.transpose();
    if (has_bias()) y.rowwise() += bias.value.row(0);
    return y;
  }
};

}  // namespace qcnet
