// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

// Standalone acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <string>

#include "gradcheck.hpp"
#include "qcnet/featurize.hpp"
#include "qcnet/homology.hpp"
#include "qcnet/periodic.hpp"
#include "qcnet/qcomplex.hpp"
#include "qcnet/sformer.hpp"
#include "qcnet/trainer.hpp"
#include "support.hpp"

using namespace qcnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Prepared {
  QuotientComplex c;
  FeatureSet f;
};

Prepared prepare_one(const CrystalStructure& s, int k) {
  Prepared p{build_complex(neighbor_list(s, k)), {}};
  p.f = raw_features(p.c, s, AtomFeatureTable::placeholder());
  return p;
}

Outcome neighbor_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int match = 0;
  for (int t = 0; t < 200; ++t) {
    const auto s = testing::random_structure(rng, 6);
    if (neighbor_list(s, 12) == brute_force_neighbors(s, 12, 4)) ++match;
  }
  const double secs = seconds_since(t0);
  return {match == 200 && secs < 60.0, std::to_string(match) + "/200 exact, " + fmt("%.1f s", secs)};
}

Outcome complex_counts() {
  const auto ca = build_complex(neighbor_list(testing::catio3(), 12));
  const auto cu = build_complex(neighbor_list(testing::cubic(1.0), 6));
  std::set<Offset> offsets;
  bool loops = true;
  for (const auto& e : cu.graph.edges) {
    offsets.insert(e.offset);
    loops = loops && e.src == 0 && e.dst == 0;
  }
  const std::set<Offset> unit{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  const bool ok = ca.n_vertices() == 5 && ca.graph.edges.size() == 60 && cu.graph.edges.size() == 6 && loops &&
                  offsets == unit && cu.n_triangles() == 0;
  return {ok, "CaTiO3 " + std::to_string(ca.n_vertices()) + "V/" + std::to_string(ca.graph.edges.size()) +
                  "E, cubic " + std::to_string(cu.graph.edges.size()) + " loops/" +
                  std::to_string(cu.n_triangles()) + " triangles"};
}

Outcome triangle_closure() {
  std::mt19937_64 rng(8080);
  long triangles = 0, bad = 0;
  for (int t = 0; t < 200; ++t) {
    const auto c = build_complex(neighbor_list(testing::random_structure(rng, 6), 12));
    for (const auto& tri : c.triangles) {
      ++triangles;
      if (!(tri.offsets[2] == tri.offsets[0] + tri.offsets[1])) ++bad;
    }
  }
  return {bad == 0 && triangles > 0, std::to_string(triangles) + " triangles over 200 graphs, " +
                                         std::to_string(bad) + " violations"};
}

Outcome feature_dims() {
  const auto s = testing::catio3();
  const auto c = build_complex(neighbor_list(s, 12));
  const auto model = SformerModel::initialized(ModelConfig{}, 0);
  const auto f = featurize_complex(c, s, AtomFeatureTable::placeholder(), model.embed);
  bool ok = f.h0_raw.cols() == 92 && f.h1_raw.cols() == 376 && f.h2_raw.cols() == 216 && f.h0.cols() == 64 &&
            f.h1.cols() == 64 && f.h2.cols() == 64;
  for (const RbfBank* bank : {&RbfBank::edge(), &RbfBank::triangle()}) {
    for (std::size_t j = 0; j < bank->centers.size(); ++j) {
      const auto v = rbf_expand(bank->centers[j], *bank);
      for (std::size_t k = 0; k < bank->sigmas.size(); ++k) ok = ok && v[k * bank->centers.size() + j] == 1.0;
    }
  }
  const double dprime = kEdgeDistanceScale / 0.75;
  ok = ok && dprime == -1.0;
  return {ok, "dims 92/376/216/64, rbf peaks 1.0, d'(0.75) = " + fmt("%g", dprime)};
}

Outcome invariance() {
  std::mt19937_64 rng(7);
  SformerModel m = SformerModel::initialized(ModelConfig{}, 7);
  std::uniform_real_distribution<double> stat(-0.5, 0.5), u(0.0, 1.0);
  for (BatchNormParams* bn : m.batch_norms()) {
    for (Eigen::Index i = 0; i < bn->running_mean.size(); ++i) {
      bn->running_mean.data()[i] = stat(rng);
      bn->running_var.data()[i] = 1.0 + stat(rng);
    }
  }
  m.mode = Mode::Eval;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto s = testing::random_structure(rng, 4);
    const auto base = prepare_one(s, 12);
    const double y = predict_one(m, base.c, base.f);
    const double scale = std::max(1.0, std::abs(y));
    for (const auto& moved : {testing::rotated(s, testing::random_rotation(rng)),
                              testing::translated(s, Vec3(u(rng), u(rng), u(rng))),
                              testing::permuted(s, testing::random_permutation(rng, static_cast<int>(s.size())))}) {
      const auto p = prepare_one(moved, 12);
      worst = std::max(worst, std::abs(predict_one(m, p.c, p.f) - y) / scale);
    }
  }
  return {worst <= 1e-9, "20 structures, max relative deviation " + fmt("%.2e", worst)};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  const auto rep = gradcheck::run_suite(20, 42);
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(rep.models) + " models, " + std::to_string(rep.checked) + " entries, " +
                       std::to_string(rep.failures) + " failures, max rel " + fmt("%.1e", rep.max_rel_error) +
                       ", " + fmt("%.1f s", secs);
  if (!rep.worst.empty()) detail += " (" + rep.worst + ")";
  return {rep.models >= 20 && rep.failures == 0 && secs < 300.0, detail};
}

Outcome residual_identity() {
  std::mt19937_64 rng(6);
  const auto s = testing::random_structure(rng, 4);
  const auto c = build_complex(neighbor_list(s, 8));
  SformerModel m = SformerModel::initialized(ModelConfig{}, 6);
  auto zero = [](SformerLayerParams& L) {
    for (LinearParams* lin : {&L.query, &L.key, &L.value, &L.coface_key, &L.coface_value, &L.key_mlp, &L.value_mlp,
                              &L.message, &L.update}) {
      lin->weight.value.setZero();
      if (lin->has_bias()) lin->bias.value.setZero();
    }
  };
  for (auto& L : m.node_layers) zero(L);
  for (auto& b : m.edge_node_layers) {
    zero(b.edge_layer);
    zero(b.node_layer);
  }
  const FeatureSet f = featurize_complex(c, s, AtomFeatureTable::placeholder(), m.embed);
  const auto vr = vertex_routes(c);
  const auto er = edge_routes(c);
  bool ok = true;
  for (Mode mode : {Mode::Train, Mode::Eval}) {
    for (auto& L : m.node_layers) ok = ok && layer_update_values(L, f.h0, f.h1, vr, mode) == f.h0;
    for (auto& b : m.edge_node_layers) {
      ok = ok && layer_update_values(b.edge_layer, f.h1, f.h2, er, mode) == f.h1;
      ok = ok && layer_update_values(b.node_layer, f.h0, f.h1, vr, mode) == f.h0;
    }
  }
  return {ok, "all 9 layers, train and eval, bitwise h' == h"};
}

Outcome overfit() {
  const auto t0 = Clock::now();
  const std::clock_t cpu0 = std::clock();
  const auto records = testing::synthetic_dataset(32, 11);
  TrainConfig cfg = hybrid_preset();
  cfg.seed = 1;
  const PreparedSet data = prepare(records, cfg.k_neighbors, AtomFeatureTable::placeholder(), 1);
  TrainResult r = train(cfg, data, {});
  r.model.mode = Mode::Eval;
  const double mae = evaluate(r.model, data).mae;
  const double secs = seconds_since(t0);
  const double cpu = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
  return {mae < 0.01 && secs < 600.0 && cfg.batch_size == 64 && cfg.peak_lr == 0.005 && cfg.epochs == 500,
          "32 structures, " + std::to_string(r.history.size()) + " epochs, train MAE " + fmt("%.5f", mae) + ", " +
              fmt("%.0f s wall", secs) + fmt(" (%.0f s cpu)", cpu)};
}

Outcome main_theorem() {
  std::mt19937_64 rng(4);
  int pass = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const double prob = 0.3 + 0.6 * static_cast<double>(rng() % 1000) / 1000.0;
    const auto k = hom::random_flag_complex(n, prob, 3, rng());
    const auto p = hom::random_partition(k, rng());
    if (hom::verify_theorem(k, p).all_verdicts()) ++pass;
  }
  const auto path = hom::SimplicialComplex::from_maximal({{0, 1}, {1, 2}});
  const auto cls = hom::VertexPartition::completed(path, {{0, 1, 2}});
  const int star = hom::betti(hom::build_k_tilde(path, cls), 1);
  const int pairwise = hom::betti(hom::build_pairwise(path, cls), 1);
  return {pass == 200 && star == 2 && pairwise == 3,
          std::to_string(pass) + "/200 all verdicts; 3-path one class: star b1=" + std::to_string(star) +
              ", pairwise b1=" + std::to_string(pairwise)};
}

Outcome glued_path_bouquet() {
  const auto path = hom::SimplicialComplex::from_maximal({{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const auto kt = hom::build_k_tilde(path, hom::VertexPartition::completed(path, {{0, 1, 2, 3, 4}}));
  const int b0 = hom::betti(kt, 0), b1 = hom::betti(kt, 1);
  return {b0 == 1 && b1 == 4, "b0=" + std::to_string(b0) + ", b1=" + std::to_string(b1)};
}

Outcome metrics_identities() {
  const std::vector<double> y{0.3, 1.7, -2.0, 4.5};
  const auto perfect = compute_metrics(y, y);
  const std::vector<double> mean(4, (0.3 + 1.7 - 2.0 + 4.5) / 4.0);
  const auto flat = compute_metrics(y, mean);
  const auto hand = compute_metrics(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 4});
  const bool ok = perfect.cod == 1.0 && perfect.pcc.has_value() && std::abs(*perfect.pcc - 1.0) <= 1e-15 &&
                  perfect.mae == 0.0 && flat.cod.has_value() && std::abs(*flat.cod) <= 1e-15 &&
                  hand.cod == -1.0;
  return {ok, "perfect COD=" + fmt("%g", perfect.cod.value_or(NAN)) + " PCC=" + fmt("%.17g", perfect.pcc.value_or(NAN)) +
                  " MAE=" + fmt("%g", perfect.mae) + "; mean COD=" + fmt("%g", flat.cod.value_or(NAN)) +
                  "; hand COD=" + fmt("%.17g", hand.cod.value_or(NAN))};
}

Outcome determinism() {
  const auto dir = fs::temp_directory_path() / "qcnet-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto records = testing::synthetic_dataset(12, 3);
  const PreparedSet data = prepare(records, 12, AtomFeatureTable::placeholder(), 1);
  TrainConfig cfg = hybrid_preset();
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.seed = 9;
  std::string hist[2];
  for (int run = 0; run < 2; ++run) {
    cfg.checkpoint_path = dir / ("run" + std::to_string(run) + ".bin");
    hist[run] = history_to_jsonl(train(cfg, data, {}).history);
  }
  const bool same_hist = hist[0] == hist[1];
  const bool same_ckpt = slurp(dir / "run0.bin") == slurp(dir / "run1.bin") && !slurp(dir / "run0.bin").empty();
  return {same_hist && same_ckpt, std::string("history ") + (same_hist ? "identical" : "differs") + ", checkpoint " +
                                      (same_ckpt ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"neighbor-oracle", neighbor_oracle},
      {"complex-counts", complex_counts},
      {"triangle-closure", triangle_closure},
      {"feature-dimensions", feature_dims},
      {"invariance", invariance},
      {"gradient-check", gradient_check},
      {"residual-identity", residual_identity},
      {"overfit", overfit},
      {"main-theorem", main_theorem},
      {"glued-path-bouquet", glued_path_bouquet},
      {"metrics-identities", metrics_identities},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
