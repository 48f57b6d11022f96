// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "qcnet/param.hpp"
#include "qcnet/qcomplex.hpp"
#include "qcnet/structure.hpp"

namespace qcnet {

inline constexpr int kVertexFeatureDim = 92;
inline constexpr int kEdgeRbfDim = 192;
inline constexpr int kEdgeFeatureDim = kEdgeRbfDim + 2 * kVertexFeatureDim;  // 376
inline constexpr int kTriangleFeatureDim = 216;
inline constexpr int kHiddenDim = 64;

/// Scale in the edge distance transform d' = kEdgeDistanceScale / d.
inline constexpr double kEdgeDistanceScale = -0.75;

/// Atomic number -> 92-d vertex descriptor.
class AtomFeatureTable {
 public:
  AtomFeatureTable() = default;

  static AtomFeatureTable from_json(std::string_view text);
  static AtomFeatureTable load(const std::filesystem::path& path);
  /// Deterministic stand-in table covering Z = 1..118 for chemistry-agnostic runs.
  static AtomFeatureTable placeholder(std::uint64_t seed = 0);

  bool contains(int z) const { return rows_.count(z) != 0; }
  /// Throws MissingSpecies.
  const std::vector<double>& at(int z) const;
  void set(int z, std::vector<double> row);
  std::string to_json() const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::map<int, std::vector<double>> rows_;
};

struct RbfBank {
  std::vector<double> centers;
  std::vector<double> sigmas;

  /// `count` centers evenly spaced over [lo, hi], both endpoints included.
  static RbfBank linear(double lo, double hi, int count, std::vector<double> sigmas);
  static const RbfBank& edge();      // 64 centers on [-4, 0], sigma {0.01, 0.1, 1}
  static const RbfBank& triangle();  // 8 centers on [0, 5], sigma {0.01, 0.1, 1}

  std::size_t dim() const { return centers.size() * sigmas.size(); }
};

/// exp(-(x - c_j)^2 / sigma_k), one block per sigma, centers ascending inside a block.
std::vector<double> rbf_expand(double x, const RbfBank& bank);
void rbf_expand_into(double x, const RbfBank& bank, std::span<double> out);

std::vector<double> edge_features(double d, std::span<const double> src_row,
                                  std::span<const double> dst_row);
std::vector<double> triangle_features(double d1, double d2, double d3);

/// Per-tier linear + SiLU projection to the hidden width.
struct EmbeddingParams {
  LinearParams vertex;
  LinearParams edge;
  LinearParams triangle;

  explicit EmbeddingParams(int hidden = kHiddenDim);
  int hidden() const { return static_cast<int>(vertex.out_features()); }
};

struct FeatureSet {
  Matrix h0_raw;  // n x 92
  Matrix h1_raw;  // m x 376
  Matrix h2_raw;  // t x 216
  Matrix h0;      // n x H
  Matrix h1;      // m x H
  Matrix h2;      // t x H
};

/// Raw simplex features only (hidden matrices left empty).
FeatureSet raw_features(const QuotientComplex& c, const CrystalStructure& s,
                        const AtomFeatureTable& table);

FeatureSet featurize_complex(const QuotientComplex& c, const CrystalStructure& s,
                             const AtomFeatureTable& table, const EmbeddingParams& params);

/// Writes <prefix>.json (shapes) and <prefix>.<tier>.bin (row-major float64, little endian).
void write_feature_dump(const FeatureSet& f, const std::filesystem::path& prefix);

Matrix silu(const Matrix& x);

}  // namespace qcnet
