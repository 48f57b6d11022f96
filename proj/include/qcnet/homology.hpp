// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qcnet::hom {

inline constexpr int kMaxDim = 3;

using Simplex = std::vector<int>;  // strictly increasing vertex labels

/// Abstract simplicial complex of dimension <= 3, closed under faces.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Closes the given simplices under taking faces. Vertex labels must be >= 0.
  static SimplicialComplex from_maximal(const std::vector<Simplex>& simplices);

  void add(Simplex s);  // adds s and all of its faces
  bool contains(const Simplex& s) const;
  /// Column index of s among the dim(s)-simplices, or -1.
  int index_of(const Simplex& s) const;

  const std::vector<Simplex>& simplices(int dim) const { return by_dim_[static_cast<std::size_t>(dim)]; }
  std::size_t count(int dim) const;
  int dimension() const;
  std::vector<int> vertices() const;
  int max_vertex() const;
  int euler_characteristic() const;
  bool is_subcomplex_of(const SimplicialComplex& other) const;

  bool operator==(const SimplicialComplex&) const = default;

 private:
  std::array<std::vector<Simplex>, kMaxDim + 1> by_dim_;  // each sorted, unique
};

struct VertexPartition {
  std::vector<std::vector<int>> classes;

  /// Adds a singleton class for every vertex of `k` not yet listed, then checks
  /// that classes are nonempty, disjoint and cover exactly the vertex set.
  static VertexPartition completed(const SimplicialComplex& k, std::vector<std::vector<int>> classes);
  void validate(const SimplicialComplex& k) const;
};

/// Dense integer matrix, row-major.
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> data;
  int at(int r, int c) const { return data[static_cast<std::size_t>(r * cols + c)]; }
};

/// Rows index (q-1)-simplices, columns q-simplices, entries (-1)^i for the face
/// that drops the i-th vertex.
IntMatrix boundary_matrix(const SimplicialComplex& k, int q);

/// Rank over the rationals (exact).
int rank(const IntMatrix& m);

int betti(const SimplicialComplex& k, int q);

/// K plus one apex per class of size >= 2, coned to the class by edges.
SimplicialComplex build_k_tilde(const SimplicialComplex& k, const VertexPartition& partition);

/// Pairwise gluing: for every pair in a class, a new vertex joined to both.
/// Not homotopy equivalent to the quotient for classes of size >= 3.
SimplicialComplex build_pairwise(const SimplicialComplex& k, const VertexPartition& partition);

/// Rank of H_q(K) -> H_q(Ktilde) induced by inclusion.
int induced_map_rank(const SimplicialComplex& k, const SimplicialComplex& ktilde, int q);

struct HomologyReport {
  std::array<int, kMaxDim + 1> betti_k{};
  std::array<int, kMaxDim + 1> betti_ktilde{};
  std::array<int, kMaxDim + 1> theta_ranks{};
  bool theta0_onto = false;
  bool theta1_injective = false;
  bool theta2_iso = false;
  bool theta3_iso = false;
  std::string construction = "star";

  bool all_verdicts() const { return theta0_onto && theta1_injective && theta2_iso && theta3_iso; }
};

HomologyReport verify_theorem(const SimplicialComplex& k, const VertexPartition& partition);
/// Same verdicts computed against an already built supercomplex.
HomologyReport homology_report(const SimplicialComplex& k, const SimplicialComplex& ktilde);

std::string report_to_json(const HomologyReport& r, int indent = 2);

/// JSON list of maximal simplices, e.g. [[0,1],[1,2,3]].
SimplicialComplex complex_from_json(std::string_view text);
std::string complex_to_json(const SimplicialComplex& k);
/// JSON list of classes, e.g. [[0,2],[1]]; unlisted vertices become singletons.
VertexPartition partition_from_json(std::string_view text, const SimplicialComplex& k);

/// Clique (flag) complex of an Erdos-Renyi graph, truncated at `max_dim`.
SimplicialComplex random_flag_complex(int vertices, double edge_prob, int max_dim, std::uint64_t seed);
VertexPartition random_partition(const SimplicialComplex& k, std::uint64_t seed);

}  // namespace qcnet::hom
