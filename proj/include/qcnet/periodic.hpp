// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <array>
#include <string>
#include <vector>

#include "qcnet/structure.hpp"

namespace qcnet {

using Offset = std::array<int, 3>;

inline Offset operator+(const Offset& a, const Offset& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Offset operator-(const Offset& a) { return {-a[0], -a[1], -a[2]}; }
inline bool is_zero(const Offset& o) { return o[0] == 0 && o[1] == 0 && o[2] == 0; }

/// Directed edge from the periodic image (src, offset) to dst in the home cell.
struct PeriodicEdge {
  int src = 0;
  int dst = 0;
  Offset offset{0, 0, 0};
  double dist = 0.0;

  bool operator==(const PeriodicEdge&) const = default;
};

/// k-nearest-neighbor quotient graph. Every vertex has exactly k in-edges and the
/// edge list is sorted by (dst, dist, src, offset) with distance ties resolved
/// under kDistanceTolerance.
struct PeriodicGraph {
  int n_vertices = 0;
  int k = 0;
  std::vector<PeriodicEdge> edges;

  bool operator==(const PeriodicGraph&) const = default;
};

inline constexpr double kDistanceTolerance = 1e-8;

/// Interplanar spacings d_i = V / |l_j x l_k|: the half-width of the cell slab
/// along each reciprocal direction.
Vec3 interplanar_spacings(const Mat3& lattice);

/// Certifiably complete k-NN search: grows a search sphere until every image
/// within the k-th distance (plus tie tolerance) has been enumerated.
PeriodicGraph neighbor_list(const CrystalStructure& s, int k, double tol = kDistanceTolerance);

/// Exhaustive enumeration over offsets |k_i| <= radius. Test oracle.
/// Throws RadiusTooSmall when the result cannot be certified.
PeriodicGraph brute_force_neighbors(const CrystalStructure& s, int k, int radius,
                                    double tol = kDistanceTolerance);

struct ImageDistance {
  double dist = 0.0;
  Offset offset{0, 0, 0};
};

/// Minimum distance from atom i to the images of atom j, i.e. the smallest
/// |cart(j) + offset·L - cart(i)|; the zero offset is excluded when i == j.
ImageDistance min_image_distance(const CrystalStructure& s, int i, int j);

/// One JSON object per line: {"src","dst","offset","dist"}.
std::string graph_to_jsonl(const PeriodicGraph& g);

}  // namespace qcnet
