// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qcnet/structure.hpp"
#include "qcnet/periodic.hpp"

namespace qcnet::testing {

CrystalStructure cubic(double a, int z = 11);
CrystalStructure catio3(double a = 3.9);

/// Triclinic cell with 1..max_atoms atoms; lattice well away from degenerate.
CrystalStructure random_structure(std::mt19937_64& rng, int max_atoms = 6, int max_z = 40);

/// Uniformly random proper rotation.
Mat3 random_rotation(std::mt19937_64& rng);
/// Rotates the Cartesian frame: lattice rows become R * l_i.
CrystalStructure rotated(const CrystalStructure& s, const Mat3& r);
/// Adds `shift` to every fractional coordinate (then wraps).
CrystalStructure translated(const CrystalStructure& s, const Vec3& shift);
/// Atom perm[i] of the result is atom i of `s`.
CrystalStructure permuted(const CrystalStructure& s, const std::vector<int>& perm);
std::vector<int> random_permutation(std::mt19937_64& rng, int n);

/// Independent reference: for each atom the shortest distance to any other
/// periodic image, by direct enumeration over offsets |k_i| <= reach.
double mean_nearest_neighbor_distance(const CrystalStructure& s, int reach = 3);

/// Records for the overfit task: target = mean nearest-neighbour distance.
std::vector<DatasetRecord> synthetic_dataset(int count, std::uint64_t seed);

/// Brute-force triangle list: every ordered edge triple with the a->b, b->c,
/// a->c pattern, offset closure and distinct image points, in (e1,e2,e3) order.
struct TriangleRef {
  int e1, e2, e3;
  bool operator==(const TriangleRef&) const = default;
  auto operator<=>(const TriangleRef&) const = default;
};
std::vector<TriangleRef> brute_force_triangles(const CrystalStructure& s, const PeriodicGraph& g);

}  // namespace qcnet::testing
