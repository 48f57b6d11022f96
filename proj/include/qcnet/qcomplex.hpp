// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <array>
#include <string>
#include <vector>

#include "qcnet/periodic.hpp"

namespace qcnet {

/// Ordered 2-simplex of the quotient complex. Edges e1 = (a -> b), e2 = (b -> c),
/// e3 = (a -> c) with offsets satisfying offsets[2] = offsets[0] + offsets[1].
/// Within a triangle the positional order is e1 < e2 < e3.
struct Triangle {
  std::array<int, 3> e{0, 0, 0};
  std::array<Offset, 3> offsets{};

  bool operator==(const Triangle&) const = default;
};

/// Message route: neighbor simplex `neighbor` reaches the receiver through the
/// shared coface `coface` (an edge index for vertices, a triangle index for edges).
struct MessagePair {
  int neighbor = 0;
  int coface = 0;

  bool operator==(const MessagePair&) const = default;
};

struct QuotientComplex {
  PeriodicGraph graph;
  std::vector<Triangle> triangles;
  /// Incoming edge indices per vertex, canonical edge order.
  std::vector<std::vector<int>> vertex_in_edges;
  /// Per edge: lower-ordered upper-adjacent edges with their shared triangle.
  std::vector<std::vector<MessagePair>> edge_neighbor_index;

  int n_vertices() const noexcept { return graph.n_vertices; }
  int n_edges() const noexcept { return static_cast<int>(graph.edges.size()); }
  int n_triangles() const noexcept { return static_cast<int>(triangles.size()); }

  bool operator==(const QuotientComplex&) const = default;
};

QuotientComplex build_complex(const PeriodicGraph& g);

/// One (source vertex, incoming edge) pair per in-edge of v.
std::vector<MessagePair> vertex_messaging_pairs(const QuotientComplex& c, int v);

/// (lower-ordered co-edge, shared triangle) pairs for edge e.
std::vector<MessagePair> edge_messaging_pairs(const QuotientComplex& c, int e);

/// {"edges": [...], "triangles": [{"e": [...], "offsets": [[...] x3]}]}
std::string complex_to_json(const QuotientComplex& c, int indent = -1);

}  // namespace qcnet
