// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/homology.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "qcnet/error.hpp"

namespace qcnet::hom {

namespace {

using RatMatrix = std::vector<std::vector<mpq_class>>;  // row-major

void validate_simplex(const Simplex& s) {
  if (s.empty() || static_cast<int>(s.size()) > kMaxDim + 1) {
    throw Error(ErrorKind::InvalidArgument, "simplices need 1 to 4 vertices");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0) throw Error(ErrorKind::InvalidArgument, "vertex labels must be non-negative");
    if (i > 0 && s[i] <= s[i - 1]) throw Error(ErrorKind::InvalidArgument, "repeated vertex in simplex");
  }
}

/// Reduces `m` to row echelon form in place; returns pivot columns.
std::vector<int> row_reduce(RatMatrix& m, int cols) {
  std::vector<int> pivots;
  int row = 0;
  const int rows = static_cast<int>(m.size());
  for (int col = 0; col < cols && row < rows; ++col) {
    int sel = -1;
    for (int r = row; r < rows; ++r) {
      if (sgn(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) != 0) {
        sel = r;
        break;
      }
    }
    if (sel < 0) continue;
    std::swap(m[static_cast<std::size_t>(row)], m[static_cast<std::size_t>(sel)]);
    auto& prow = m[static_cast<std::size_t>(row)];
    const mpq_class inv = 1 / prow[static_cast<std::size_t>(col)];
    for (int c = col; c < cols; ++c) prow[static_cast<std::size_t>(c)] *= inv;
    for (int r = 0; r < rows; ++r) {
      if (r == row) continue;
      auto& cur = m[static_cast<std::size_t>(r)];
      const mpq_class f = cur[static_cast<std::size_t>(col)];
      if (sgn(f) == 0) continue;
      for (int c = col; c < cols; ++c) cur[static_cast<std::size_t>(c)] -= f * prow[static_cast<std::size_t>(c)];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

RatMatrix to_rational(const IntMatrix& a) {
  RatMatrix m(static_cast<std::size_t>(a.rows), std::vector<mpq_class>(static_cast<std::size_t>(a.cols)));
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = a.at(r, c);
  }
  return m;
}

int rational_rank(RatMatrix m, int cols) { return static_cast<int>(row_reduce(m, cols).size()); }

/// Basis of {x : a x = 0}; each vector has a.cols entries.
std::vector<std::vector<mpq_class>> null_space(const IntMatrix& a) {
  RatMatrix m = to_rational(a);
  const auto pivots = row_reduce(m, a.cols);
  std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols), false);
  for (int p : pivots) is_pivot[static_cast<std::size_t>(p)] = true;
  std::vector<std::vector<mpq_class>> basis;
  for (int free = 0; free < a.cols; ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    std::vector<mpq_class> v(static_cast<std::size_t>(a.cols));
    v[static_cast<std::size_t>(free)] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      v[static_cast<std::size_t>(pivots[r])] = -m[r][static_cast<std::size_t>(free)];
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

void SimplicialComplex::add(Simplex s) {
  std::sort(s.begin(), s.end());
  validate_simplex(s);
  const int n = static_cast<int>(s.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    Simplex face;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) face.push_back(s[static_cast<std::size_t>(i)]);
    }
    auto& bucket = by_dim_[face.size() - 1];
    auto it = std::lower_bound(bucket.begin(), bucket.end(), face);
    if (it == bucket.end() || *it != face) bucket.insert(it, std::move(face));
  }
}

SimplicialComplex SimplicialComplex::from_maximal(const std::vector<Simplex>& simplices) {
  SimplicialComplex k;
  for (const auto& s : simplices) k.add(s);
  return k;
}

bool SimplicialComplex::contains(const Simplex& s) const { return index_of(s) >= 0; }

int SimplicialComplex::index_of(const Simplex& s) const {
  if (s.empty() || s.size() > kMaxDim + 1) return -1;
  const auto& bucket = by_dim_[s.size() - 1];
  auto it = std::lower_bound(bucket.begin(), bucket.end(), s);
  if (it == bucket.end() || *it != s) return -1;
  return static_cast<int>(it - bucket.begin());
}

std::size_t SimplicialComplex::count(int dim) const {
  if (dim < 0 || dim > kMaxDim) return 0;
  return by_dim_[static_cast<std::size_t>(dim)].size();
}

int SimplicialComplex::dimension() const {
  for (int d = kMaxDim; d >= 0; --d) {
    if (!by_dim_[static_cast<std::size_t>(d)].empty()) return d;
  }
  return -1;
}

std::vector<int> SimplicialComplex::vertices() const {
  std::vector<int> out;
  for (const auto& s : by_dim_[0]) out.push_back(s[0]);
  return out;
}

int SimplicialComplex::max_vertex() const { return by_dim_[0].empty() ? -1 : by_dim_[0].back()[0]; }

int SimplicialComplex::euler_characteristic() const {
  int chi = 0;
  for (int d = 0; d <= kMaxDim; ++d) chi += (d % 2 == 0 ? 1 : -1) * static_cast<int>(count(d));
  return chi;
}

bool SimplicialComplex::is_subcomplex_of(const SimplicialComplex& other) const {
  for (const auto& bucket : by_dim_) {
    for (const auto& s : bucket) {
      if (!other.contains(s)) return false;
    }
  }
  return true;
}

VertexPartition VertexPartition::completed(const SimplicialComplex& k,
                                           std::vector<std::vector<int>> classes) {
  std::set<int> listed;
  for (const auto& c : classes) listed.insert(c.begin(), c.end());
  for (int v : k.vertices()) {
    if (!listed.count(v)) classes.push_back({v});
  }
  VertexPartition p{std::move(classes)};
  p.validate(k);
  return p;
}

void VertexPartition::validate(const SimplicialComplex& k) const {
  std::set<int> seen;
  for (const auto& c : classes) {
    if (c.empty()) throw Error(ErrorKind::InvalidArgument, "partition class is empty");
    for (int v : c) {
      if (!seen.insert(v).second) {
        throw Error(ErrorKind::InvalidArgument, "vertex " + std::to_string(v) + " appears in two classes");
      }
      if (!k.contains({v})) {
        throw Error(ErrorKind::InvalidArgument, "vertex " + std::to_string(v) + " is not in the complex");
      }
    }
  }
  if (seen.size() != k.count(0)) throw Error(ErrorKind::InvalidArgument, "partition does not cover every vertex");
}

IntMatrix boundary_matrix(const SimplicialComplex& k, int q) {
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "boundary_matrix needs q >= 1");
  IntMatrix m;
  m.rows = static_cast<int>(k.count(q - 1));
  m.cols = static_cast<int>(k.count(q));
  m.data.assign(static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols), 0);
  if (q > kMaxDim) return m;
  const auto& cols = k.simplices(q);
  for (int c = 0; c < m.cols; ++c) {
    const auto& s = cols[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < s.size(); ++i) {
      Simplex face = s;
      face.erase(face.begin() + static_cast<long>(i));
      const int r = k.index_of(face);
      m.data[static_cast<std::size_t>(r * m.cols + c)] = (i % 2 == 0) ? 1 : -1;
    }
  }
  return m;
}

int rank(const IntMatrix& m) { return rational_rank(to_rational(m), m.cols); }

int betti(const SimplicialComplex& k, int q) {
  if (q < 0 || q > kMaxDim) return 0;
  const int cycles = static_cast<int>(k.count(q)) - (q == 0 ? 0 : rank(boundary_matrix(k, q)));
  const int boundaries = q == kMaxDim ? 0 : rank(boundary_matrix(k, q + 1));
  return cycles - boundaries;
}

SimplicialComplex build_k_tilde(const SimplicialComplex& k, const VertexPartition& partition) {
  partition.validate(k);
  SimplicialComplex out = k;
  int next = k.max_vertex() + 1;
  for (const auto& cls : partition.classes) {
    if (cls.size() < 2) continue;
    const int apex = next++;
    for (int v : cls) out.add({v, apex});
  }
  return out;
}

SimplicialComplex build_pairwise(const SimplicialComplex& k, const VertexPartition& partition) {
  partition.validate(k);
  SimplicialComplex out = k;
  int next = k.max_vertex() + 1;
  for (const auto& cls : partition.classes) {
    for (std::size_t i = 0; i < cls.size(); ++i) {
      for (std::size_t j = i + 1; j < cls.size(); ++j) {
        const int mid = next++;
        out.add({cls[i], mid});
        out.add({cls[j], mid});
      }
    }
  }
  return out;
}

int induced_map_rank(const SimplicialComplex& k, const SimplicialComplex& ktilde, int q) {
  if (!k.is_subcomplex_of(ktilde)) {
    throw Error(ErrorKind::SubcomplexViolation, "K is not a subcomplex of the target complex");
  }
  if (q < 0 || q > kMaxDim) return 0;
  const int src_n = static_cast<int>(k.count(q));
  const int dst_n = static_cast<int>(ktilde.count(q));

  // Cycle basis of K in degree q.
  std::vector<std::vector<mpq_class>> cycles;
  if (q == 0) {
    for (int i = 0; i < src_n; ++i) {
      std::vector<mpq_class> v(static_cast<std::size_t>(src_n));
      v[static_cast<std::size_t>(i)] = 1;
      cycles.push_back(std::move(v));
    }
  } else {
    cycles = null_space(boundary_matrix(k, q));
  }
  std::vector<int> to_target(static_cast<std::size_t>(src_n));
  for (int i = 0; i < src_n; ++i) {
    to_target[static_cast<std::size_t>(i)] = ktilde.index_of(k.simplices(q)[static_cast<std::size_t>(i)]);
  }

  // Columns of the boundary space B_q(Ktilde) as rows (rank is transpose-invariant).
  RatMatrix rows;
  if (q < kMaxDim) {
    const IntMatrix b = boundary_matrix(ktilde, q + 1);
    for (int c = 0; c < b.cols; ++c) {
      std::vector<mpq_class> v(static_cast<std::size_t>(dst_n));
      for (int r = 0; r < b.rows; ++r) v[static_cast<std::size_t>(r)] = b.at(r, c);
      rows.push_back(std::move(v));
    }
  }
  const int boundary_rank = rational_rank(rows, dst_n);
  for (const auto& z : cycles) {
    std::vector<mpq_class> v(static_cast<std::size_t>(dst_n));
    for (int i = 0; i < src_n; ++i) v[static_cast<std::size_t>(to_target[static_cast<std::size_t>(i)])] = z[static_cast<std::size_t>(i)];
    rows.push_back(std::move(v));
  }
  return rational_rank(std::move(rows), dst_n) - boundary_rank;
}

HomologyReport homology_report(const SimplicialComplex& k, const SimplicialComplex& ktilde) {
  HomologyReport r;
  for (int q = 0; q <= kMaxDim; ++q) {
    r.betti_k[static_cast<std::size_t>(q)] = betti(k, q);
    r.betti_ktilde[static_cast<std::size_t>(q)] = betti(ktilde, q);
    r.theta_ranks[static_cast<std::size_t>(q)] = induced_map_rank(k, ktilde, q);
  }
  r.theta0_onto = r.theta_ranks[0] == r.betti_ktilde[0];
  r.theta1_injective = r.theta_ranks[1] == r.betti_k[1];
  auto iso = [&r](int q) {
    const auto i = static_cast<std::size_t>(q);
    return r.theta_ranks[i] == r.betti_k[i] && r.theta_ranks[i] == r.betti_ktilde[i];
  };
  r.theta2_iso = iso(2);
  r.theta3_iso = iso(3);
  return r;
}

HomologyReport verify_theorem(const SimplicialComplex& k, const VertexPartition& partition) {
  return homology_report(k, build_k_tilde(k, partition));
}

std::string report_to_json(const HomologyReport& r, int indent) {
  nlohmann::json j = {{"construction", r.construction},
                      {"betti_K", r.betti_k},
                      {"betti_Ktilde", r.betti_ktilde},
                      {"theta_ranks", r.theta_ranks},
                      {"verdicts",
                       {{"theta0_onto", r.theta0_onto},
                        {"theta1_injective", r.theta1_injective},
                        {"theta2_iso", r.theta2_iso},
                        {"theta3_iso", r.theta3_iso}}},
                      {"all_verdicts", r.all_verdicts()}};
  return j.dump(indent);
}

SimplicialComplex complex_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedInput(std::string("complex JSON: ") + e.what());
  }
  if (!j.is_array()) throw MalformedInput("complex must be a JSON list of simplices");
  SimplicialComplex k;
  for (const auto& s : j) {
    if (!s.is_array()) throw MalformedInput("each simplex must be a list of vertex ids");
    Simplex simplex;
    for (const auto& v : s) {
      if (!v.is_number_integer()) throw MalformedInput("vertex ids must be integers");
      simplex.push_back(v.get<int>());
    }
    try {
      k.add(simplex);
    } catch (const Error& e) {
      throw MalformedInput(e.what());
    }
  }
  return k;
}

std::string complex_to_json(const SimplicialComplex& k) {
  // Faces are implied, but listing every simplex keeps the file unambiguous.
  nlohmann::json j = nlohmann::json::array();
  for (int d = 0; d <= kMaxDim; ++d) {
    for (const auto& s : k.simplices(d)) j.push_back(s);
  }
  return j.dump();
}

VertexPartition partition_from_json(std::string_view text, const SimplicialComplex& k) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedInput(std::string("partition JSON: ") + e.what());
  }
  if (!j.is_array()) throw MalformedInput("partition must be a JSON list of classes");
  std::vector<std::vector<int>> classes;
  for (const auto& c : j) {
    if (!c.is_array()) throw MalformedInput("each class must be a list of vertex ids");
    std::vector<int> cls;
    for (const auto& v : c) {
      if (!v.is_number_integer()) throw MalformedInput("vertex ids must be integers");
      cls.push_back(v.get<int>());
    }
    classes.push_back(std::move(cls));
  }
  try {
    return VertexPartition::completed(k, std::move(classes));
  } catch (const Error& e) {
    throw MalformedInput(e.what());
  }
}

namespace {

struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace

SimplicialComplex random_flag_complex(int vertices, double edge_prob, int max_dim, std::uint64_t seed) {
  Rng rng{seed};
  const int n = vertices;
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
  SimplicialComplex k;
  for (int v = 0; v < n; ++v) k.add({v});
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (rng.uniform() < edge_prob) adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
    }
  }
  auto linked = [&adj](int a, int b) { return adj[static_cast<std::size_t>(std::min(a, b))][static_cast<std::size_t>(std::max(a, b))]; };
  // Enumerate cliques of size up to max_dim + 1 by increasing vertex order.
  std::vector<Simplex> stack;
  for (int v = 0; v < n; ++v) stack.push_back({v});
  while (!stack.empty()) {
    Simplex s = std::move(stack.back());
    stack.pop_back();
    k.add(s);
    if (static_cast<int>(s.size()) > max_dim) continue;
    for (int w = s.back() + 1; w < n; ++w) {
      bool ok = true;
      for (int u : s) ok = ok && linked(u, w);
      if (!ok) continue;
      Simplex t = s;
      t.push_back(w);
      stack.push_back(std::move(t));
    }
  }
  return k;
}

VertexPartition random_partition(const SimplicialComplex& k, std::uint64_t seed) {
  Rng rng{seed ^ 0xa5a5a5a5a5a5a5a5ULL};
  const auto verts = k.vertices();
  if (verts.empty()) return {};
  const std::size_t groups = 1 + static_cast<std::size_t>(rng.next() % verts.size());
  std::vector<std::vector<int>> classes(groups);
  for (int v : verts) classes[static_cast<std::size_t>(rng.next() % groups)].push_back(v);
  std::erase_if(classes, [](const auto& c) { return c.empty(); });
  VertexPartition p{std::move(classes)};
  p.validate(k);
  return p;
}

}  // namespace qcnet::hom
