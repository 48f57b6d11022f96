// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/periodic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>

#include "qcnet/error.hpp"

namespace qcnet {

namespace {

struct Candidate {
  double dist;
  int src;
  Offset offset;
};

bool offset_less(const Offset& a, const Offset& b) { return a < b; }

/// Orders candidates by distance, treating a chain of gaps <= tol as one tie
/// class ordered internally by (src, offset). Returns the index one past the
/// tie class that contains the k-th candidate.
std::size_t order_candidates(std::vector<Candidate>& c, std::size_t k, double tol) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.src != b.src) return a.src < b.src;
    return offset_less(a.offset, b.offset);
  });
  std::size_t begin = 0;
  std::size_t class_end_of_k = c.size();
  while (begin < c.size()) {
    std::size_t end = begin + 1;
    while (end < c.size() && c[end].dist - c[end - 1].dist <= tol) ++end;
    std::sort(c.begin() + static_cast<long>(begin), c.begin() + static_cast<long>(end),
              [](const Candidate& a, const Candidate& b) {
                if (a.src != b.src) return a.src < b.src;
                return offset_less(a.offset, b.offset);
              });
    if (begin < k && k <= end) class_end_of_k = end;
    begin = end;
  }
  return class_end_of_k;
}

double image_distance(const CrystalStructure& s, int src, int dst, const Offset& o) {
  Vec3 df = s.frac[static_cast<std::size_t>(src)] - s.frac[static_cast<std::size_t>(dst)] +
            Vec3(o[0], o[1], o[2]);
  return (s.lattice.transpose() * df).norm();
}

/// Every image of `src` whose distance to `dst` is at most `radius`.
void collect_in_sphere(const CrystalStructure& s, int dst, int src, double radius,
                       const Vec3& spacing, std::vector<Candidate>& out) {
  const Vec3 delta = s.frac[static_cast<std::size_t>(src)] - s.frac[static_cast<std::size_t>(dst)];
  std::array<int, 3> lo{}, hi{};
  for (int c = 0; c < 3; ++c) {
    const double reach = radius / spacing[c];
    lo[c] = static_cast<int>(std::floor(-reach - delta[c])) - 1;
    hi[c] = static_cast<int>(std::ceil(reach - delta[c])) + 1;
  }
  for (int a = lo[0]; a <= hi[0]; ++a) {
    for (int b = lo[1]; b <= hi[1]; ++b) {
      for (int c = lo[2]; c <= hi[2]; ++c) {
        const Offset o{a, b, c};
        if (src == dst && is_zero(o)) continue;
        const double d = image_distance(s, src, dst, o);
        if (d <= radius) out.push_back({d, src, o});
      }
    }
  }
}

void validate_k(const CrystalStructure& s, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (s.species.empty()) throw Error(ErrorKind::InvalidArgument, "structure has no atoms");
}

}  // namespace

Vec3 interplanar_spacings(const Mat3& lattice) {
  const double vol = std::abs(lattice.determinant());
  Vec3 d;
  for (int i = 0; i < 3; ++i) {
    const Vec3 a = lattice.row((i + 1) % 3).transpose();
    const Vec3 b = lattice.row((i + 2) % 3).transpose();
    d[i] = vol / a.cross(b).norm();
  }
  return d;
}

PeriodicGraph neighbor_list(const CrystalStructure& s, int k, double tol) {
  validate_k(s, k);
  const int n = static_cast<int>(s.size());
  const Vec3 spacing = interplanar_spacings(s.lattice);
  const double vol = std::abs(s.lattice.determinant());
  const double initial =
      std::cbrt(3.0 * (k + 1) * vol / (4.0 * std::numbers::pi * n)) + spacing.minCoeff() * 0.5;

  PeriodicGraph g;
  g.n_vertices = n;
  g.k = k;
  g.edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  std::vector<Candidate> cand;
  for (int dst = 0; dst < n; ++dst) {
    double radius = initial;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200) {
        throw Error(ErrorKind::InsufficientCandidates,
                    "neighbor search failed to converge (internal error)");
      }
      cand.clear();
      for (int src = 0; src < n; ++src) collect_in_sphere(s, dst, src, radius, spacing, cand);
      if (cand.size() < static_cast<std::size_t>(k)) {
        radius *= 1.5;
        continue;
      }
      const std::size_t class_end = order_candidates(cand, static_cast<std::size_t>(k), tol);
      // Any image tied with the last member of the k-th tie class lies within
      // last + tol; the sphere must contain all of them.
      const double needed = cand[class_end - 1].dist + tol;
      if (needed > radius) {
        radius = std::max(needed * (1.0 + 1e-12), radius * 1.25);
        continue;
      }
      break;
    }
    for (int i = 0; i < k; ++i) {
      const auto& c = cand[static_cast<std::size_t>(i)];
      g.edges.push_back({c.src, dst, c.offset, c.dist});
    }
  }
  return g;
}

PeriodicGraph brute_force_neighbors(const CrystalStructure& s, int k, int radius, double tol) {
  validate_k(s, k);
  if (radius < 0) throw Error(ErrorKind::InvalidArgument, "radius must be >= 0");
  const int n = static_cast<int>(s.size());
  const Vec3 spacing = interplanar_spacings(s.lattice);

  PeriodicGraph g;
  g.n_vertices = n;
  g.k = k;
  std::vector<Candidate> cand;
  for (int dst = 0; dst < n; ++dst) {
    cand.clear();
    for (int src = 0; src < n; ++src) {
      for (int a = -radius; a <= radius; ++a) {
        for (int b = -radius; b <= radius; ++b) {
          for (int c = -radius; c <= radius; ++c) {
            const Offset o{a, b, c};
            if (src == dst && is_zero(o)) continue;
            cand.push_back({image_distance(s, src, dst, o), src, o});
          }
        }
      }
    }
    if (cand.size() < static_cast<std::size_t>(k)) {
      throw Error(ErrorKind::RadiusTooSmall, "search box holds fewer than k images");
    }
    order_candidates(cand, static_cast<std::size_t>(k), tol);
    // Largest ball around dst inside the searched box frac in [-r, r + 1).
    const Vec3& f = s.frac[static_cast<std::size_t>(dst)];
    double certified = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 3; ++c) {
      certified = std::min(certified, (f[c] + radius) * spacing[c]);
      certified = std::min(certified, (radius + 1.0 - f[c]) * spacing[c]);
    }
    const double kth = cand[static_cast<std::size_t>(k - 1)].dist;
    if (kth > certified * (1.0 + 1e-12)) {
      throw Error(ErrorKind::RadiusTooSmall,
                  "k-th distance " + std::to_string(kth) + " exceeds certified radius " +
                      std::to_string(certified));
    }
    for (int i = 0; i < k; ++i) {
      const auto& c = cand[static_cast<std::size_t>(i)];
      g.edges.push_back({c.src, dst, c.offset, c.dist});
    }
  }
  return g;
}

ImageDistance min_image_distance(const CrystalStructure& s, int i, int j) {
  const int n = static_cast<int>(s.size());
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(ErrorKind::InvalidArgument, "atom index out of range");
  }
  const Vec3 spacing = interplanar_spacings(s.lattice);
  double radius = spacing.minCoeff();
  std::vector<Candidate> cand;
  while (true) {
    cand.clear();
    collect_in_sphere(s, i, j, radius, spacing, cand);
    if (!cand.empty()) {
      const std::size_t end = order_candidates(cand, 1, kDistanceTolerance);
      if (cand[end - 1].dist + kDistanceTolerance <= radius) break;
    }
    radius *= 1.5;
  }
  return {cand.front().dist, cand.front().offset};
}

std::string graph_to_jsonl(const PeriodicGraph& g) {
  std::string out;
  for (const auto& e : g.edges) {
    nlohmann::json j = {{"src", e.src},
                        {"dst", e.dst},
                        {"offset", {e.offset[0], e.offset[1], e.offset[2]}},
                        {"dist", e.dist}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace qcnet
