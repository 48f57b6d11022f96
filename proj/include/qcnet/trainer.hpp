// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcnet/featurize.hpp"
#include "qcnet/sformer.hpp"
#include "qcnet/structure.hpp"

namespace qcnet {

/// Shape of the one-cycle schedule: cosine warmup from peak/start_div to peak
/// over `warmup_fraction` of the steps, then cosine decay to peak/end_div.
struct OneCycleShape {
  double warmup_fraction = 0.3;
  double start_div = 25.0;
  double end_div = 1e4;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int batch_size = 64;
  int epochs = 500;
  double peak_lr = 0.005;
  double weight_decay = 1e-5;
  LossKind loss = LossKind::Mae;
  int k_neighbors = 12;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint_path;  // empty: no checkpointing
  ModelConfig model;
  OneCycleShape schedule;
  AdamWConfig adamw;

  /// Throws InvalidArgument when an invariant is violated.
  void validate(bool allow_zero_epochs = false) const;
};

/// Published training presets for the two dataset families.
TrainConfig inorganic_preset();  // batch 64, 1000 epochs, lr 6e-4, mse
TrainConfig hybrid_preset();     // batch 64, 500 epochs, lr 5e-3, mae

double one_cycle_lr(long step, long total_steps, double peak_lr, const OneCycleShape& shape = {});

/// Decoupled-weight-decay Adam over a fixed parameter list.
class AdamW {
 public:
  AdamW(std::vector<Param*> params, AdamWConfig config, double weight_decay);
  void step(double lr);
  long steps() const { return t_; }

 private:
  std::vector<Param*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamWConfig config_;
  double weight_decay_;
  long t_ = 0;
};

/// Structures converted to complexes + raw features, ready for batching.
struct PreparedSet {
  std::vector<std::string> ids;
  std::vector<QuotientComplex> complexes;
  std::vector<FeatureSet> features;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  Sample sample(std::size_t i) const { return {&complexes[i], &features[i], targets[i]}; }
  std::vector<Sample> samples() const;
  PreparedSet subset(std::span<const std::size_t> indices) const;
};

/// Builds k-NN complexes and raw features. `threads` > 1 splits the work; the
/// result does not depend on the thread count.
PreparedSet prepare(std::span<const DatasetRecord> records, int k, const AtomFeatureTable& table,
                    int threads = 1);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double lr = 0.0;
};

struct TrainResult {
  SformerModel model;
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_selection_loss = 0.0;
};

/// Full training run from a seeded initialization.
TrainResult train(const TrainConfig& config, const PreparedSet& train_set, const PreparedSet& val_set);

/// Continues training an existing model (no re-initialization).
TrainResult train_from(SformerModel model, const TrainConfig& config, const PreparedSet& train_set,
                       const PreparedSet& val_set);

/// Loads a checkpoint whose architecture must match `config.model` and continues training.
/// Throws CheckpointMismatch naming every differing field.
TrainResult finetune(const std::filesystem::path& checkpoint, const TrainConfig& config,
                     const PreparedSet& train_set, const PreparedSet& val_set = {});

struct MetricsReport {
  std::size_t count = 0;
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double mad = 0.0;
  std::optional<double> cod;            // empty when targets have zero variance
  std::optional<double> pcc;            // empty when either side has zero variance
  std::optional<double> mad_mae_ratio;  // empty when mae == 0
  std::string status = "ok";            // "ok" or "zero_variance"
};

MetricsReport compute_metrics(std::span<const double> target, std::span<const double> prediction);
MetricsReport evaluate(SformerModel& model, const PreparedSet& data);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle followed by a contiguous partition into `folds` parts.
std::vector<Fold> kfold_split(std::size_t n, int folds, std::uint64_t seed);

/// Seeded permutation of 0..n-1 (portable across standard libraries).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

std::string history_to_jsonl(const std::vector<EpochRecord>& history);
std::string metrics_to_json(const MetricsReport& m);
std::string config_to_json(const TrainConfig& c);

}  // namespace qcnet
