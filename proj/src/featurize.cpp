// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/featurize.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qcnet/error.hpp"

namespace qcnet {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_distance(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorKind::NonPositiveDistance, "distance must be positive, got " + std::to_string(d));
  }
}

}  // namespace

AtomFeatureTable AtomFeatureTable::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("atom table: ") + e.what());
  }
  if (!j.is_object()) throw MalformedInput("atom table must be an object keyed by Z");
  AtomFeatureTable t;
  for (const auto& [key, val] : j.items()) {
    int z = 0;
    try {
      std::size_t used = 0;
      z = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw MalformedInput("atom table key '" + key + "' is not an atomic number", 0, key);
    }
    if (!val.is_array() || val.size() != kVertexFeatureDim) {
      throw MalformedInput("atom table rows need 92 numbers", 0, key);
    }
    std::vector<double> row;
    row.reserve(kVertexFeatureDim);
    for (const auto& x : val) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        throw MalformedInput("atom table entries must be finite numbers", 0, key);
      }
      row.push_back(x.get<double>());
    }
    t.rows_[z] = std::move(row);
  }
  return t;
}

AtomFeatureTable AtomFeatureTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open atom table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

AtomFeatureTable AtomFeatureTable::placeholder(std::uint64_t seed) {
  AtomFeatureTable t;
  std::uint64_t state = seed ^ 0x51ed270b27b1a4c3ULL;
  for (int z = 1; z <= kMaxAtomicNumber; ++z) {
    std::vector<double> row(kVertexFeatureDim);
    for (auto& x : row) x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    t.rows_[z] = std::move(row);
  }
  return t;
}

const std::vector<double>& AtomFeatureTable::at(int z) const {
  auto it = rows_.find(z);
  if (it == rows_.end()) throw MissingSpecies(z);
  return it->second;
}

void AtomFeatureTable::set(int z, std::vector<double> row) {
  if (row.size() != kVertexFeatureDim) {
    throw Error(ErrorKind::InvalidArgument, "atom feature rows must have 92 entries");
  }
  rows_[z] = std::move(row);
}

std::string AtomFeatureTable::to_json() const {
  json j = json::object();
  for (const auto& [z, row] : rows_) j[std::to_string(z)] = row;
  return j.dump();
}

RbfBank RbfBank::linear(double lo, double hi, int count, std::vector<double> sigmas) {
  RbfBank b;
  b.sigmas = std::move(sigmas);
  b.centers.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    b.centers[static_cast<std::size_t>(i)] =
        count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return b;
}

const RbfBank& RbfBank::edge() {
  static const RbfBank bank = linear(-4.0, 0.0, 64, {0.01, 0.1, 1.0});
  return bank;
}

const RbfBank& RbfBank::triangle() {
  static const RbfBank bank = linear(0.0, 5.0, 8, {0.01, 0.1, 1.0});
  return bank;
}

void rbf_expand_into(double x, const RbfBank& bank, std::span<double> out) {
  std::size_t idx = 0;
  for (double sigma : bank.sigmas) {
    for (double c : bank.centers) {
      const double d = x - c;
      out[idx++] = std::exp(-(d * d) / sigma);
    }
  }
}

std::vector<double> rbf_expand(double x, const RbfBank& bank) {
  std::vector<double> out(bank.dim());
  rbf_expand_into(x, bank, out);
  return out;
}

std::vector<double> edge_features(double d, std::span<const double> src_row,
                                  std::span<const double> dst_row) {
  check_distance(d);
  if (src_row.size() != kVertexFeatureDim || dst_row.size() != kVertexFeatureDim) {
    throw Error(ErrorKind::InvalidArgument, "vertex feature rows must have 92 entries");
  }
  std::vector<double> out(kEdgeFeatureDim);
  rbf_expand_into(kEdgeDistanceScale / d, RbfBank::edge(),
                  std::span<double>(out).first(kEdgeRbfDim));
  std::copy(src_row.begin(), src_row.end(), out.begin() + kEdgeRbfDim);
  std::copy(dst_row.begin(), dst_row.end(), out.begin() + kEdgeRbfDim + kVertexFeatureDim);
  return out;
}

std::vector<double> triangle_features(double d1, double d2, double d3) {
  check_distance(d1);
  check_distance(d2);
  check_distance(d3);
  const std::array<double, 9> values{d1, d2, d3, d1 * d2, d1 * d3, d2 * d3, d1 * d1, d2 * d2, d3 * d3};
  const RbfBank& bank = RbfBank::triangle();
  const std::size_t block = bank.dim();
  std::vector<double> out(values.size() * block);
  for (std::size_t v = 0; v < values.size(); ++v) {
    rbf_expand_into(values[v], bank, std::span<double>(out).subspan(v * block, block));
  }
  return out;
}

EmbeddingParams::EmbeddingParams(int hidden)
    : vertex("embed.vertex", kVertexFeatureDim, hidden),
      edge("embed.edge", kEdgeFeatureDim, hidden),
      triangle("embed.triangle", kTriangleFeatureDim, hidden) {}

Matrix silu(const Matrix& x) {
  return x.unaryExpr([](double v) { return v / (1.0 + std::exp(-v)); });
}

FeatureSet raw_features(const QuotientComplex& c, const CrystalStructure& s,
                        const AtomFeatureTable& table) {
  if (static_cast<int>(s.size()) != c.n_vertices()) {
    throw Error(ErrorKind::InvalidArgument, "structure and complex disagree on vertex count");
  }
  FeatureSet f;
  const int n = c.n_vertices();
  const int m = c.n_edges();
  const int t = c.n_triangles();
  f.h0_raw.resize(n, kVertexFeatureDim);
  for (int v = 0; v < n; ++v) {
    const auto& row = table.at(s.species[static_cast<std::size_t>(v)]);
    f.h0_raw.row(v) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), kVertexFeatureDim);
  }
  f.h1_raw.resize(m, kEdgeFeatureDim);
  for (int e = 0; e < m; ++e) {
    const auto& edge = c.graph.edges[static_cast<std::size_t>(e)];
    const auto row = edge_features(edge.dist, table.at(s.species[static_cast<std::size_t>(edge.src)]),
                                   table.at(s.species[static_cast<std::size_t>(edge.dst)]));
    f.h1_raw.row(e) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), kEdgeFeatureDim);
  }
  f.h2_raw.resize(t, kTriangleFeatureDim);
  for (int i = 0; i < t; ++i) {
    const auto& tri = c.triangles[static_cast<std::size_t>(i)];
    const auto dist = [&](int pos) {
      return c.graph.edges[static_cast<std::size_t>(tri.e[static_cast<std::size_t>(pos)])].dist;
    };
    const auto row = triangle_features(dist(0), dist(1), dist(2));
    f.h2_raw.row(i) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), kTriangleFeatureDim);
  }
  return f;
}

FeatureSet featurize_complex(const QuotientComplex& c, const CrystalStructure& s,
                             const AtomFeatureTable& table, const EmbeddingParams& params) {
  FeatureSet f = raw_features(c, s, table);
  f.h0 = silu(params.vertex.apply(f.h0_raw));
  f.h1 = silu(params.edge.apply(f.h1_raw));
  f.h2 = f.h2_raw.rows() > 0 ? silu(params.triangle.apply(f.h2_raw))
                             : Matrix(0, params.hidden());
  return f;
}

namespace {

void write_bin(const Matrix& m, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "feature dumps assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * static_cast<Eigen::Index>(sizeof(double))));
}

}  // namespace

void write_feature_dump(const FeatureSet& f, const std::filesystem::path& prefix) {
  const std::pair<const char*, const Matrix*> tiers[] = {
      {"h0_raw", &f.h0_raw}, {"h1_raw", &f.h1_raw}, {"h2_raw", &f.h2_raw},
      {"h0", &f.h0},         {"h1", &f.h1},         {"h2", &f.h2}};
  json header = json::object();
  header["dtype"] = "float64";
  header["order"] = "row-major";
  header["endianness"] = "little";
  for (const auto& [name, mat] : tiers) {
    const auto file = prefix.string() + "." + name + ".bin";
    write_bin(*mat, file);
    header["tensors"][name] = {{"shape", {mat->rows(), mat->cols()}},
                               {"file", std::filesystem::path(file).filename().string()}};
  }
  std::ofstream out(prefix.string() + ".json");
  if (!out) throw Error(ErrorKind::Io, "cannot write feature header for " + prefix.string());
  out << header.dump(2) << '\n';
}

}  // namespace qcnet
