// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/qcomplex.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <tuple>

#include "qcnet/error.hpp"

namespace qcnet {

namespace {

using EdgeKey = std::tuple<int, int, Offset>;

/// Cover points (vertex, cell offset) of the triangle with c placed in the home cell.
bool image_points_distinct(const PeriodicEdge& e1, const PeriodicEdge& e2) {
  const std::pair<int, Offset> a{e1.src, e1.offset + e2.offset};
  const std::pair<int, Offset> b{e2.src, e2.offset};
  const std::pair<int, Offset> c{e2.dst, Offset{0, 0, 0}};
  return a != b && b != c && a != c;
}

}  // namespace

QuotientComplex build_complex(const PeriodicGraph& g) {
  QuotientComplex qc;
  qc.graph = g;
  const int n = g.n_vertices;
  const int m = static_cast<int>(g.edges.size());

  std::map<EdgeKey, int> lookup;
  std::vector<std::vector<int>> out_edges(static_cast<std::size_t>(n));
  qc.vertex_in_edges.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < m; ++i) {
    const auto& e = g.edges[static_cast<std::size_t>(i)];
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw Error(ErrorKind::InvalidArgument, "edge endpoint out of range");
    }
    lookup.emplace(EdgeKey{e.src, e.dst, e.offset}, i);
    out_edges[static_cast<std::size_t>(e.src)].push_back(i);
    qc.vertex_in_edges[static_cast<std::size_t>(e.dst)].push_back(i);
  }

  // e1 = (a -> b, o1), e2 = (b -> c, o2) closes with e3 = (a -> c, o1 + o2).
  for (int i1 = 0; i1 < m; ++i1) {
    const auto& e1 = g.edges[static_cast<std::size_t>(i1)];
    for (int i2 : out_edges[static_cast<std::size_t>(e1.dst)]) {
      const auto& e2 = g.edges[static_cast<std::size_t>(i2)];
      const Offset o3 = e1.offset + e2.offset;
      auto it = lookup.find(EdgeKey{e1.src, e2.dst, o3});
      if (it == lookup.end()) continue;
      if (!image_points_distinct(e1, e2)) continue;
      qc.triangles.push_back({{i1, i2, it->second}, {e1.offset, e2.offset, o3}});
    }
  }
  std::sort(qc.triangles.begin(), qc.triangles.end(),
            [](const Triangle& a, const Triangle& b) { return a.e < b.e; });

  qc.edge_neighbor_index.assign(static_cast<std::size_t>(m), {});
  for (int t = 0; t < static_cast<int>(qc.triangles.size()); ++t) {
    const auto& e = qc.triangles[static_cast<std::size_t>(t)].e;
    qc.edge_neighbor_index[static_cast<std::size_t>(e[1])].push_back({e[0], t});
    qc.edge_neighbor_index[static_cast<std::size_t>(e[2])].push_back({e[0], t});
    qc.edge_neighbor_index[static_cast<std::size_t>(e[2])].push_back({e[1], t});
  }
  return qc;
}

std::vector<MessagePair> vertex_messaging_pairs(const QuotientComplex& c, int v) {
  std::vector<MessagePair> out;
  const auto& in = c.vertex_in_edges.at(static_cast<std::size_t>(v));
  out.reserve(in.size());
  for (int e : in) out.push_back({c.graph.edges[static_cast<std::size_t>(e)].src, e});
  return out;
}

std::vector<MessagePair> edge_messaging_pairs(const QuotientComplex& c, int e) {
  return c.edge_neighbor_index.at(static_cast<std::size_t>(e));
}

std::string complex_to_json(const QuotientComplex& c, int indent) {
  using nlohmann::json;
  json edges = json::array();
  for (const auto& e : c.graph.edges) {
    edges.push_back({{"src", e.src},
                     {"dst", e.dst},
                     {"offset", {e.offset[0], e.offset[1], e.offset[2]}},
                     {"dist", e.dist}});
  }
  json tris = json::array();
  for (const auto& t : c.triangles) {
    json offs = json::array();
    for (const auto& o : t.offsets) offs.push_back({o[0], o[1], o[2]});
    tris.push_back({{"e", {t.e[0], t.e[1], t.e[2]}}, {"offsets", offs}});
  }
  json j = {{"n_vertices", c.n_vertices()}, {"k", c.graph.k}, {"edges", edges}, {"triangles", tris}};
  return j.dump(indent);
}

}  // namespace qcnet
