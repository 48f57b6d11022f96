// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "support.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numeric>

namespace qcnet::testing {

CrystalStructure cubic(double a, int z) {
  CrystalStructure s;
  s.lattice = Mat3::Identity() * a;
  s.species = {z};
  s.frac = {Vec3::Zero()};
  return s;
}

CrystalStructure catio3(double a) {
  CrystalStructure s;
  s.id = "CaTiO3";
  s.lattice = Mat3::Identity() * a;
  s.species = {20, 22, 8, 8, 8};
  s.frac = {Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5), Vec3(0.5, 0.5, 0), Vec3(0.5, 0, 0.5), Vec3(0, 0.5, 0.5)};
  return s;
}

CrystalStructure random_structure(std::mt19937_64& rng, int max_atoms, int max_z) {
  std::uniform_real_distribution<double> len(2.5, 6.0);
  std::uniform_real_distribution<double> angle(60.0, 120.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_int_distribution<int> species(1, max_z);
  constexpr double deg = 3.14159265358979323846 / 180.0;
  for (;;) {
    const double a = len(rng), b = len(rng), c = len(rng);
    const double al = angle(rng) * deg, be = angle(rng) * deg, ga = angle(rng) * deg;
    const double cx = c * std::cos(be);
    const double cy = c * (std::cos(al) - std::cos(be) * std::cos(ga)) / std::sin(ga);
    const double cz2 = c * c - cx * cx - cy * cy;
    if (cz2 < 0.2 * c * c) continue;  // too flat
    CrystalStructure s;
    s.lattice << a, 0, 0, b * std::cos(ga), b * std::sin(ga), 0, cx, cy, std::sqrt(cz2);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      s.species.push_back(species(rng));
      s.frac.emplace_back(unit(rng), unit(rng), unit(rng));
    }
    // Keep atoms apart so every structure is physically sensible.
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      for (int j = i + 1; j < n && ok; ++j) {
        for (int x = -1; x <= 1 && ok; ++x)
          for (int y = -1; y <= 1 && ok; ++y)
            for (int z = -1; z <= 1 && ok; ++z) {
              const Vec3 d = s.cartesian(static_cast<std::size_t>(j), {x, y, z}) - s.cartesian(static_cast<std::size_t>(i));
              if (d.norm() < 0.7) ok = false;
            }
      }
    }
    if (ok) return canonicalize(std::move(s));
  }
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

CrystalStructure rotated(const CrystalStructure& s, const Mat3& r) {
  CrystalStructure out = s;
  out.lattice = s.lattice * r.transpose();
  return out;
}

CrystalStructure translated(const CrystalStructure& s, const Vec3& shift) {
  CrystalStructure out = s;
  for (auto& f : out.frac) f += shift;
  return canonicalize(std::move(out));
}

CrystalStructure permuted(const CrystalStructure& s, const std::vector<int>& perm) {
  CrystalStructure out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.species[static_cast<std::size_t>(perm[i])] = s.species[i];
    out.frac[static_cast<std::size_t>(perm[i])] = s.frac[i];
  }
  return out;
}

std::vector<int> random_permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

double mean_nearest_neighbor_distance(const CrystalStructure& s, int reach) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    const Vec3 pi = s.lattice.transpose() * s.frac[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      for (int x = -reach; x <= reach; ++x)
        for (int y = -reach; y <= reach; ++y)
          for (int z = -reach; z <= reach; ++z) {
            if (i == j && x == 0 && y == 0 && z == 0) continue;
            const Vec3 pj = s.lattice.transpose() * (s.frac[j] + Vec3(x, y, z));
            best = std::min(best, (pj - pi).norm());
          }
    }
    total += best;
  }
  return total / static_cast<double>(s.size());
}

std::vector<DatasetRecord> synthetic_dataset(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale(2.5, 4.0);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::uniform_real_distribution<double> shear(-0.3, 0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> atoms(1, 3);
  const int palette[] = {8, 11, 12, 14, 20, 26};
  std::uniform_int_distribution<int> pick(0, 5);
  std::vector<DatasetRecord> out;
  for (int i = 0; i < count; ++i) {
    CrystalStructure s;
    const double a = scale(rng);
    s.lattice << a * jitter(rng), 0, 0, shear(rng), a * jitter(rng), 0, 0, shear(rng), a * jitter(rng);
    const int n = atoms(rng);
    for (int j = 0; j < n; ++j) {
      s.species.push_back(palette[pick(rng)]);
      s.frac.emplace_back(unit(rng), unit(rng), unit(rng));
    }
    s.id = "syn" + std::to_string(i);
    s = canonicalize(std::move(s));
    const double target = mean_nearest_neighbor_distance(s);
    out.push_back({std::move(s), target, std::nullopt});
  }
  return out;
}

std::vector<TriangleRef> brute_force_triangles(const CrystalStructure& s, const PeriodicGraph& g) {
  const int m = static_cast<int>(g.edges.size());
  std::vector<TriangleRef> out;
  auto pos = [&](int v, const Offset& o) { return s.cartesian(static_cast<std::size_t>(v), o); };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < m; ++l) {
        const auto& e1 = g.edges[static_cast<std::size_t>(i)];
        const auto& e2 = g.edges[static_cast<std::size_t>(j)];
        const auto& e3 = g.edges[static_cast<std::size_t>(l)];
        if (e1.dst != e2.src || e1.src != e3.src || e2.dst != e3.dst) continue;
        if (e3.offset != e1.offset + e2.offset) continue;
        // Place c in the home cell; b sits at o2, a at o1 + o2.
        const Vec3 pa = pos(e1.src, e3.offset), pb = pos(e2.src, e2.offset), pc = pos(e2.dst, {0, 0, 0});
        if ((pa - pb).norm() < 1e-9 || (pb - pc).norm() < 1e-9 || (pa - pc).norm() < 1e-9) continue;
        out.push_back({i, j, l});
      }
    }
  }
  return out;
}

}  // namespace qcnet::testing
