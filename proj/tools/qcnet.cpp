// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qcnet/config.hpp"
#include "qcnet/error.hpp"
#include "qcnet/featurize.hpp"
#include "qcnet/homology.hpp"
#include "qcnet/periodic.hpp"
#include "qcnet/qcomplex.hpp"
#include "qcnet/sformer.hpp"
#include "qcnet/structure.hpp"
#include "qcnet/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qcnet;

namespace {

// Exit-code taxonomy.
constexpr int kOk = 0;
constexpr int kInput = 1;
constexpr int kConfig = 2;
constexpr int kData = 3;
constexpr int kNumeric = 4;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::CheckpointMismatch:
      return kConfig;
    case ErrorKind::MissingSpecies:
    case ErrorKind::InvalidData:
    case ErrorKind::TooFewSamples:
    case ErrorKind::EmptyComplex:
    case ErrorKind::InsufficientCandidates:
    case ErrorKind::RadiusTooSmall:
      return kData;
    case ErrorKind::NonFiniteLoss:
      return kNumeric;
    default:
      return kInput;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

AtomFeatureTable load_table(const std::string& path) {
  if (path.empty() || path == "placeholder") return AtomFeatureTable::placeholder();
  return AtomFeatureTable::load(path);
}

// k stored next to a checkpoint by the trainer, if any.
int sidecar_k(const fs::path& checkpoint, int fallback) {
  std::ifstream in(checkpoint.string() + ".json");
  if (!in) return fallback;
  try {
    return json::parse(in).value("k_neighbors", fallback);
  } catch (const json::exception&) {
    return fallback;
  }
}

// Data-stage wrapper: malformed records inside a dataset are data errors.
DatasetLoad load_dataset_checked(const fs::path& path) {
  auto load = load_dataset(path);
  if (!load.diagnostics.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": " << load.diagnostics.size() << " bad record(s)";
    for (const auto& d : load.diagnostics) msg << "\n  line " << d.line << ": " << d.message;
    throw Error(ErrorKind::InvalidData, msg.str());
  }
  if (load.records.empty()) throw Error(ErrorKind::InvalidData, path.string() + ": no records");
  return load;
}

PreparedSet prepare_or_data_error(std::span<const DatasetRecord> records, int k, const AtomFeatureTable& table,
                                  int threads) {
  try {
    return prepare(records, k, table, threads);
  } catch (const Error& e) {
    if (exit_code_for(e.kind()) == kInput) throw Error(ErrorKind::InvalidData, e.what());
    throw;
  }
}

struct BuildArgs {
  std::string structure;
  int k = 12;
  std::string out;
  std::string edges;
};

int run_build(const BuildArgs& a) {
  const auto s = read_structure_file(a.structure);
  const auto c = build_complex(neighbor_list(s, a.k));
  fs::path out = a.out;
  if (out.empty()) out = fs::path(a.structure).filename().replace_extension(".complex.json");
  write_text(out, complex_to_json(c, 2) + "\n");
  if (!a.edges.empty()) write_text(a.edges, graph_to_jsonl(c.graph));
  std::cout << "vertices: " << c.n_vertices() << "\nedges: " << c.n_edges() << "\ntriangles: " << c.n_triangles()
            << "\n";
  return kOk;
}

struct FeaturizeArgs {
  std::string structure;
  int k = 12;
  std::string atom_table;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_featurize(const FeaturizeArgs& a) {
  const auto s = read_structure_file(a.structure);
  const auto table = load_table(a.atom_table);
  const auto c = build_complex(neighbor_list(s, a.k));
  EmbeddingParams embed;
  if (!a.checkpoint.empty()) {
    embed = load_checkpoint(a.checkpoint).embed;
  } else {
    embed = SformerModel::initialized(ModelConfig{}, resolve_seed(a.seed, 0)).embed;
  }
  const auto f = featurize_complex(c, s, table, embed);
  fs::path prefix = a.out;
  if (prefix.empty()) prefix = fs::path(a.structure).filename().replace_extension(".features");
  write_feature_dump(f, prefix);
  std::cout << "h0: " << f.h0_raw.rows() << "x" << f.h0_raw.cols() << " -> " << f.h0.cols() << "\n"
            << "h1: " << f.h1_raw.rows() << "x" << f.h1_raw.cols() << " -> " << f.h1.cols() << "\n"
            << "h2: " << f.h2_raw.rows() << "x" << f.h2_raw.cols() << " -> " << f.h2.cols() << "\n";
  return kOk;
}

struct TrainArgs {
  std::string config;
  std::string checkpoint;  // finetune only
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> threads;
};

int run_train(const TrainArgs& a, bool finetuning) {
  RunConfig rc = parse_run_config(a.config);
  if (finetuning && !fs::is_regular_file(a.checkpoint)) {
    throw Error(ErrorKind::InvalidArgument, "pretrained checkpoint not found: " + a.checkpoint);
  }
  TrainConfig& tc = rc.train;
  tc.seed = resolve_seed(a.seed, tc.seed);
  if (a.epochs) tc.epochs = *a.epochs;
  tc.validate(/*allow_zero_epochs=*/finetuning);
  const int threads = a.threads.value_or(rc.threads);
  if (threads < 1) throw Error(ErrorKind::InvalidArgument, "--threads must be >= 1");

  const AtomFeatureTable table = rc.atom_table ? AtomFeatureTable::load(*rc.atom_table) : AtomFeatureTable::placeholder();
  const auto load = load_dataset_checked(rc.dataset);
  std::vector<DatasetRecord> train_records, val_records, test_records;
  for (const auto& r : load.records) {
    const auto tag = r.split.value_or(SplitTag::Train);
    (tag == SplitTag::Train ? train_records : tag == SplitTag::Val ? val_records : test_records).push_back(r);
  }
  if (rc.val_dataset) {
    const auto extra = load_dataset_checked(*rc.val_dataset);
    val_records.insert(val_records.end(), extra.records.begin(), extra.records.end());
  }
  if (train_records.empty()) throw Error(ErrorKind::InvalidData, "no training records in " + rc.dataset.string());

  const auto train_set = prepare_or_data_error(train_records, tc.k_neighbors, table, threads);
  const auto val_set = prepare_or_data_error(val_records, tc.k_neighbors, table, threads);
  const auto test_set = prepare_or_data_error(test_records, tc.k_neighbors, table, threads);

  fs::create_directories(rc.output_dir);
  tc.checkpoint_path = rc.output_dir / "checkpoint.bin";
  auto result = finetuning ? finetune(a.checkpoint, tc, train_set, val_set) : train(tc, train_set, val_set);
  write_text(rc.output_dir / "history.jsonl", history_to_jsonl(result.history));

  // Report on the selected (best) checkpoint; zero-epoch finetuning keeps the loaded weights.
  SformerModel model = result.history.empty() ? std::move(result.model) : load_checkpoint(tc.checkpoint_path);
  if (result.history.empty()) {
    save_checkpoint(model, tc.checkpoint_path);
    write_text(tc.checkpoint_path.string() + ".json", config_to_json(tc) + "\n");
  }
  model.mode = Mode::Eval;
  json metrics = json::object();
  const auto train_metrics = evaluate(model, train_set);
  metrics["train"] = json::parse(metrics_to_json(train_metrics));
  if (val_set.size() > 0) metrics["val"] = json::parse(metrics_to_json(evaluate(model, val_set)));
  if (test_set.size() > 0) metrics["test"] = json::parse(metrics_to_json(evaluate(model, test_set)));
  write_text(rc.output_dir / "metrics.json", metrics.dump(2) + "\n");

  char line[128];
  std::snprintf(line, sizeof line, "%.6f", train_metrics.mae);
  std::cout << "epochs: " << result.history.size() << "\n";
  if (result.best_epoch >= 0) std::cout << "best epoch: " << result.best_epoch << "\n";
  std::cout << "train MAE: " << line << "\n";
  if (metrics.contains("val")) {
    std::snprintf(line, sizeof line, "%.6f", metrics["val"]["mae"].get<double>());
    std::cout << "val MAE: " << line << "\n";
  }
  std::cout << "artifacts: " << rc.output_dir.string() << "\n";
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string atom_table;
  std::optional<int> k;
  std::string out;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  if (a.threads < 1) throw Error(ErrorKind::InvalidArgument, "--threads must be >= 1");
  auto model = load_checkpoint(a.checkpoint);
  const auto table = load_table(a.atom_table);
  const auto load = load_dataset_checked(a.dataset);
  const int k = a.k.value_or(sidecar_k(a.checkpoint, 12));
  const auto data = prepare_or_data_error(load.records, k, table, a.threads);
  model.mode = Mode::Eval;
  const std::string text = metrics_to_json(evaluate(model, data)) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << text;
  return kOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string structure;
  std::string atom_table;
  std::optional<int> k;
};

int run_predict(const PredictArgs& a) {
  const auto s = read_structure_file(a.structure);
  auto model = load_checkpoint(a.checkpoint);
  const auto table = load_table(a.atom_table);
  for (int z : s.species) {
    if (!table.contains(z)) throw MissingSpecies(z);
  }
  const int k = a.k.value_or(sidecar_k(a.checkpoint, 12));
  const auto c = build_complex(neighbor_list(s, k));
  const auto f = raw_features(c, s, table);
  model.mode = Mode::Eval;
  const double y = predict_one(model, c, f);
  char line[64];
  std::snprintf(line, sizeof line, "%.6f", y);
  const std::string id = s.id.value_or(fs::path(a.structure).stem().string());
  std::cout << line << "\n" << json{{"id", id}, {"prediction", y}}.dump() << "\n";
  return kOk;
}

struct HomologyArgs {
  std::string complex;
  std::string partition;
  bool pairwise = false;
  bool strict = false;
  std::string out;
};

int run_homology(const HomologyArgs& a) {
  hom::SimplicialComplex k;
  hom::VertexPartition p;
  try {
    k = hom::complex_from_json(read_text(a.complex));
    p = a.partition.empty() ? hom::VertexPartition::completed(k, {})
                            : hom::partition_from_json(read_text(a.partition), k);
  } catch (const MalformedInput& e) {
    throw MalformedInput(std::string(a.complex) + ": " + e.what());
  }
  const auto star = hom::verify_theorem(k, p);
  json report;
  bool failed = !star.all_verdicts();
  if (a.pairwise) {
    auto pw = hom::homology_report(k, hom::build_pairwise(k, p));
    pw.construction = "pairwise";
    report = json::parse(hom::report_to_json(pw));
    report["star_betti_Ktilde"] = star.betti_ktilde;
    json diff = json::array();
    for (int q = 0; q <= hom::kMaxDim; ++q) {
      if (pw.betti_ktilde[q] != star.betti_ktilde[q]) {
        diff.push_back({{"q", q}, {"pairwise", pw.betti_ktilde[q]}, {"star", star.betti_ktilde[q]}});
      }
    }
    report["betti_discrepancy"] = diff;
    failed = !pw.all_verdicts() || !diff.empty();
  } else {
    report = json::parse(hom::report_to_json(star));
  }
  const std::string text = report.dump(2) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << text;
  // The star construction is always held to the theorem; the pairwise variant only under --strict.
  if (failed && (!a.pairwise || a.strict)) {
    std::cerr << "qcnet: homology verdict failed\n";
    return kNumeric;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcnet: crystal quotient complexes, simplex-transformer property prediction and homology checks",
               "qcnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qcnet 0.1.0");

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build the k-NN quotient complex of a structure and write it as JSON");
  b->add_option("structure", build.structure, "Structure file (JSON or POSCAR)")->required();
  b->add_option("-k,--neighbors", build.k, "Nearest neighbours per atom")->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("-o,--out", build.out, "Complex JSON output (default: <structure>.complex.json)");
  b->add_option("--edges", build.edges, "Also write the periodic edge list as JSON lines");

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "Compute raw and embedded simplex features of a structure");
  f->add_option("structure", feat.structure, "Structure file (JSON or POSCAR)")->required();
  f->add_option("-k,--neighbors", feat.k, "Nearest neighbours per atom")->capture_default_str()->check(CLI::PositiveNumber);
  f->add_option("--atom-table", feat.atom_table, "Atom feature table JSON (default: seeded placeholder)");
  f->add_option("--checkpoint", feat.checkpoint, "Take embedding weights from this checkpoint");
  f->add_option("--seed", feat.seed, "Seed for embedding weights when no checkpoint is given (overrides QCNET_SEED)");
  f->add_option("-o,--out", feat.out, "Output prefix for <prefix>.json and <prefix>.<tier>.bin");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model from a config file");
  t->add_option("config", tr.config, "INI config file")->required();
  t->add_option("--seed", tr.seed, "Training seed (overrides QCNET_SEED and the config)");
  t->add_option("--epochs", tr.epochs, "Override the configured epoch count");
  t->add_option("--threads", tr.threads, "Worker threads for featurization");

  TrainArgs ft;
  auto* fn = app.add_subcommand("finetune", "Continue training a pretrained checkpoint under a new config");
  fn->add_option("config", ft.config, "INI config file")->required();
  fn->add_option("--checkpoint", ft.checkpoint, "Pretrained checkpoint")->required();
  fn->add_option("--seed", ft.seed, "Training seed (overrides QCNET_SEED and the config)");
  fn->add_option("--epochs", ft.epochs, "Override the configured epoch count (0 keeps the weights)");
  fn->add_option("--threads", ft.threads, "Worker threads for featurization");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset and print metrics JSON");
  e->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  e->add_option("--dataset", ev.dataset, "Dataset JSON lines")->required();
  e->add_option("--atom-table", ev.atom_table, "Atom feature table JSON (default: seeded placeholder)");
  e->add_option("-k,--neighbors", ev.k, "Nearest neighbours per atom (default: from checkpoint sidecar, else 12)");
  e->add_option("-o,--out", ev.out, "Also write the metrics JSON here");
  e->add_option("--threads", ev.threads, "Worker threads for featurization")->capture_default_str();

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Predict the target of one structure");
  p->add_option("--checkpoint", pr.checkpoint, "Model checkpoint")->required();
  p->add_option("structure", pr.structure, "Structure file (JSON or POSCAR)")->required();
  p->add_option("--atom-table", pr.atom_table, "Atom feature table JSON (default: seeded placeholder)");
  p->add_option("-k,--neighbors", pr.k, "Nearest neighbours per atom (default: from checkpoint sidecar, else 12)");

  HomologyArgs ho;
  auto* h = app.add_subcommand("homology", "Check the inclusion K -> Ktilde against the quotient homology theorem");
  h->add_option("complex", ho.complex, "Complex JSON: list of maximal simplices")->required();
  h->add_option("--partition", ho.partition, "Partition JSON: list of vertex classes (default: singletons)");
  h->add_flag("--pairwise", ho.pairwise, "Use the pairwise gluing construction and report Betti discrepancies");
  h->add_flag("--strict", ho.strict, "With --pairwise, exit nonzero when a verdict fails or Betti numbers differ");
  h->add_option("-o,--out", ho.out, "Also write the report JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*b) return run_build(build);
    if (*f) return run_featurize(feat);
    if (*t) return run_train(tr, false);
    if (*fn) return run_train(ft, true);
    if (*e) return run_eval(ev);
    if (*p) return run_predict(pr);
    if (*h) return run_homology(ho);
  } catch (const Error& err) {
    std::cerr << "qcnet: " << to_string(err.kind()) << ": " << err.what() << "\n";
    return exit_code_for(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "qcnet: " << err.what() << "\n";
    return kInput;
  }
  return kConfig;
}
