// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "qcnet/error.hpp"
#include "qcnet/periodic.hpp"
#include "support.hpp"

using namespace qcnet;

TEST_CASE("one-atom cubic k=6: six unit self loops") {
  const auto s = testing::cubic(1.0);
  const auto g = neighbor_list(s, 6);
  REQUIRE(g.edges.size() == 6);
  std::set<Offset> offsets;
  for (const auto& e : g.edges) {
    CHECK(e.src == 0);
    CHECK(e.dst == 0);
    CHECK(e.dist == doctest::Approx(1.0).epsilon(1e-12));
    offsets.insert(e.offset);
  }
  const std::set<Offset> expected{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  CHECK(offsets == expected);
  CHECK(g == brute_force_neighbors(s, 6, 1));
  CHECK(g == brute_force_neighbors(s, 6, 3));
}

TEST_CASE("one-atom cubic k=12: tie break picks lexicographically smallest sqrt(2) images") {
  const auto s = testing::cubic(1.0);
  const auto g = neighbor_list(s, 12);
  REQUIRE(g.edges.size() == 12);
  int unit = 0, diag = 0;
  std::vector<Offset> diag_offsets;
  for (const auto& e : g.edges) {
    if (std::abs(e.dist - 1.0) < 1e-9) ++unit;
    if (std::abs(e.dist - std::sqrt(2.0)) < 1e-9) {
      ++diag;
      diag_offsets.push_back(e.offset);
    }
  }
  CHECK(unit == 6);
  CHECK(diag == 6);
  // Oracle: all 12 face-diagonal offsets sorted lexicographically, first six.
  std::vector<Offset> all;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z)
        if (std::abs(x) + std::abs(y) + std::abs(z) == 2) all.push_back({x, y, z});
  std::sort(all.begin(), all.end());
  all.resize(6);
  CHECK(diag_offsets == all);
  CHECK(g == neighbor_list(s, 12));
  CHECK(g == brute_force_neighbors(s, 12, 3));
}

TEST_CASE("CaTiO3 k=12") {
  const auto s = testing::catio3();
  const auto g = neighbor_list(s, 12);
  CHECK(g.edges.size() == 60);
  CHECK(g == brute_force_neighbors(s, 12, 3));
  for (int o = 2; o < 5; ++o) {
    std::vector<PeriodicEdge> in;
    for (const auto& e : g.edges)
      if (e.dst == o) in.push_back(e);
    REQUIRE(in.size() == 12);
    CHECK(in[0].src == 1);  // Ti
    CHECK(in[1].src == 1);
    CHECK(in[0].dist == doctest::Approx(3.9 / 2));
    CHECK(in[2].dist > in[1].dist + 1e-6);
  }
}

TEST_CASE("edge invariants") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto s = testing::random_structure(rng);
    const int k = 1 + static_cast<int>(rng() % 14);
    const auto g = neighbor_list(s, k);
    REQUIRE(g.edges.size() == s.size() * static_cast<std::size_t>(k));
    std::vector<int> indegree(s.size(), 0);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto& e = g.edges[i];
      ++indegree[static_cast<std::size_t>(e.dst)];
      CHECK(!(e.src == e.dst && is_zero(e.offset)));
      CHECK(e.dist > 0.0);
      const double d = (s.cartesian(static_cast<std::size_t>(e.src), e.offset) - s.cartesian(static_cast<std::size_t>(e.dst))).norm();
      CHECK(std::abs(d - e.dist) <= 1e-9);
      if (i > 0) {
        const auto& p = g.edges[i - 1];
        CHECK(std::make_tuple(p.dst, p.dist) <= std::make_tuple(e.dst, e.dist + 1e-8));
      }
    }
    for (int deg : indegree) CHECK(deg == k);
  }
}

TEST_CASE("fast search equals brute force on random triclinic cells") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 200; ++t) {
    const auto s = testing::random_structure(rng);
    const auto fast = neighbor_list(s, 12);
    const auto slow = brute_force_neighbors(s, 12, 4);
    REQUIRE_MESSAGE(fast == slow, "case " << t);
  }
}

TEST_CASE("brute force refuses an uncertified radius") {
  const auto s = testing::cubic(1.0);
  CHECK_THROWS_AS(brute_force_neighbors(s, 1, 0), Error);
  try {
    brute_force_neighbors(s, 1, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RadiusTooSmall);
  }
  // 27 candidates but the 26th-nearest sits outside the inscribed ball of radius 1.
  CHECK_THROWS_AS(brute_force_neighbors(s, 26, 1), Error);
}

TEST_CASE("min image distance") {
  SUBCASE("self image") {
    const auto r = min_image_distance(testing::cubic(1.0), 0, 0);
    CHECK(r.dist == doctest::Approx(1.0));
    CHECK(!is_zero(r.offset));
  }
  SUBCASE("two atoms in a cubic cell") {
    CrystalStructure s = testing::cubic(2.0);
    s.species.push_back(11);
    s.frac.emplace_back(0.5, 0, 0);
    const auto r = min_image_distance(s, 0, 1);
    CHECK(r.dist == doctest::Approx(1.0));
    // The (0,0,0) and (-1,0,0) images tie; the tie rule takes the lexicographically smaller offset.
    CHECK((r.offset == Offset{-1, 0, 0} || r.offset == Offset{0, 0, 0}));
  }
  SUBCASE("symmetry and rotation") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 30; ++t) {
      const auto s = testing::random_structure(rng);
      const auto rs = testing::rotated(s, testing::random_rotation(rng));
      for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        for (int j = 0; j < static_cast<int>(s.size()); ++j) {
          const auto ij = min_image_distance(s, i, j);
          const auto ji = min_image_distance(s, j, i);
          CHECK(std::abs(ij.dist - ji.dist) <= 1e-12);
          CHECK(std::abs(min_image_distance(rs, i, j).dist - ij.dist) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("rotation leaves every edge unchanged") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 30; ++t) {
    const auto s = testing::random_structure(rng);
    const auto g = neighbor_list(s, 12);
    const auto gr = neighbor_list(testing::rotated(s, testing::random_rotation(rng)), 12);
    REQUIRE(g.edges.size() == gr.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      CHECK(g.edges[i].src == gr.edges[i].src);
      CHECK(g.edges[i].dst == gr.edges[i].dst);
      CHECK(g.edges[i].offset == gr.edges[i].offset);
      CHECK(std::abs(g.edges[i].dist - gr.edges[i].dist) <= 1e-9);
    }
  }
}

TEST_CASE("origin shift keeps per-vertex distance multisets") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const auto s = testing::random_structure(rng);
    const auto g = neighbor_list(s, 8);
    const auto gt = neighbor_list(testing::translated(s, Vec3(u(rng), u(rng), u(rng))), 8);
    REQUIRE(g.edges.size() == gt.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      CHECK(g.edges[i].dst == gt.edges[i].dst);
      CHECK(std::abs(g.edges[i].dist - gt.edges[i].dist) <= 1e-9);
    }
  }
}

TEST_CASE("edge dump is canonical JSON lines") {
  const auto g = neighbor_list(testing::cubic(1.0), 6);
  const auto text = graph_to_jsonl(g);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(text.rfind(R"({"dist":1.0,"dst":0,"offset":[)", 0) == 0);
}
