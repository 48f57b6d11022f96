// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <thread>

#include "qcnet/error.hpp"
#include "qcnet/periodic.hpp"

namespace qcnet {

using nlohmann::json;

void TrainConfig::validate(bool allow_zero_epochs) const {
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
  if (epochs < (allow_zero_epochs ? 0 : 1)) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 1");
  if (!(peak_lr > 0.0)) throw Error(ErrorKind::InvalidArgument, "peak_lr must be > 0");
  if (!(weight_decay >= 0.0)) throw Error(ErrorKind::InvalidArgument, "weight_decay must be >= 0");
  if (k_neighbors < 1) throw Error(ErrorKind::InvalidArgument, "k_neighbors must be >= 1");
  if (!(schedule.warmup_fraction > 0.0 && schedule.warmup_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "warmup_fraction must lie in (0, 1)");
  }
  if (!(schedule.start_div >= 1.0 && schedule.end_div >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "schedule divisors must be >= 1");
  }
}

TrainConfig inorganic_preset() {
  TrainConfig c;
  c.batch_size = 64;
  c.epochs = 1000;
  c.peak_lr = 0.0006;
  c.loss = LossKind::Mse;
  return c;
}

TrainConfig hybrid_preset() {
  TrainConfig c;
  c.batch_size = 64;
  c.epochs = 500;
  c.peak_lr = 0.005;
  c.loss = LossKind::Mae;
  return c;
}

double one_cycle_lr(long step, long total_steps, double peak_lr, const OneCycleShape& shape) {
  if (total_steps < 1 || step < 0 || step >= total_steps) {
    throw Error(ErrorKind::InvalidArgument, "one_cycle_lr: step out of range");
  }
  const double start = peak_lr / shape.start_div;
  const double end = peak_lr / shape.end_div;
  const long boundary =
      std::max(1L, static_cast<long>(std::floor(shape.warmup_fraction * static_cast<double>(total_steps))));
  if (step <= boundary) {
    const double t = static_cast<double>(step) / static_cast<double>(boundary);
    return start + (peak_lr - start) * 0.5 * (1.0 - std::cos(std::numbers::pi * t));
  }
  const long span = total_steps - 1 - boundary;
  if (span <= 0) return peak_lr;
  const double t = static_cast<double>(step - boundary) / static_cast<double>(span);
  return end + (peak_lr - end) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

AdamW::AdamW(std::vector<Param*> params, AdamWConfig config, double weight_decay)
    : params_(std::move(params)), config_(config), weight_decay_(weight_decay) {
  for (Param* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    if (p.value.size() == 0) continue;
    if (p.grad.size() != p.value.size()) p.zero_grad();
    if (weight_decay_ != 0.0) p.value *= 1.0 - lr * weight_decay_;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + config_.epsilon);
  }
}

std::vector<Sample> PreparedSet::samples() const {
  std::vector<Sample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(sample(i));
  return out;
}

PreparedSet PreparedSet::subset(std::span<const std::size_t> indices) const {
  PreparedSet out;
  for (std::size_t i : indices) {
    out.ids.push_back(ids[i]);
    out.complexes.push_back(complexes[i]);
    out.features.push_back(features[i]);
    out.targets.push_back(targets[i]);
  }
  return out;
}

PreparedSet prepare(std::span<const DatasetRecord> records, int k, const AtomFeatureTable& table,
                    int threads) {
  PreparedSet out;
  const std::size_t n = records.size();
  out.ids.resize(n);
  out.complexes.resize(n);
  out.features.resize(n);
  out.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int z : records[i].structure.species) {
      if (!table.contains(z)) throw MissingSpecies(z);
    }
  }
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& r = records[i];
      out.ids[i] = r.structure.id.value_or(std::to_string(i));
      out.complexes[i] = build_complex(neighbor_list(r.structure, k));
      out.features[i] = raw_features(out.complexes[i], r.structure, table);
      out.targets[i] = r.target;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    work(0, n);
    return out;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::uint64_t state = seed;
  auto next = [&state] {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(next() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

namespace {

double dataset_loss(SformerModel& model, const PreparedSet& data, LossKind loss) {
  const auto preds = predict(model, data.samples());
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - data.targets[i];
    total += loss == LossKind::Mse ? d * d : std::abs(d);
  }
  return total / static_cast<double>(preds.size());
}

void save_with_sidecar(const SformerModel& model, const TrainConfig& config) {
  save_checkpoint(model, config.checkpoint_path);
  std::ofstream side(config.checkpoint_path.string() + ".json");
  if (!side) throw Error(ErrorKind::Io, "cannot write checkpoint sidecar");
  side << config_to_json(config) << '\n';
}

}  // namespace

TrainResult train_from(SformerModel model, const TrainConfig& config, const PreparedSet& train_set,
                       const PreparedSet& val_set) {
  config.validate(/*allow_zero_epochs=*/true);
  if (train_set.size() == 0) throw Error(ErrorKind::InvalidArgument, "training set is empty");
  TrainResult result{std::move(model), {}, -1, 0.0};
  SformerModel& m = result.model;
  if (config.epochs == 0) return result;

  const std::size_t n = train_set.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const long batches_per_epoch = static_cast<long>((n + batch - 1) / batch);
  const long total_steps = batches_per_epoch * config.epochs;
  AdamW optimizer(m.parameters(), config.adamw, config.weight_decay);
  const auto all = train_set.samples();

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = seeded_permutation(n, config.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    double lr = 0.0;
    m.mode = Mode::Train;
    for (long b = 0; b < batches_per_epoch; ++b) {
      std::vector<Sample> mb;
      const std::size_t begin = static_cast<std::size_t>(b) * batch;
      const std::size_t end = std::min(n, begin + batch);
      for (std::size_t i = begin; i < end; ++i) mb.push_back(all[order[i]]);
      LossResult lr_result;
      try {
        lr_result = loss_and_gradients(m, mb, config.loss, /*commit_stats=*/true);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFiniteLoss) throw;
        std::string ids;
        for (std::size_t i = begin; i < end; ++i) ids += (ids.empty() ? "" : ",") + train_set.ids[order[i]];
        throw Error(ErrorKind::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                                  ", batch " + std::to_string(b) + " (samples " + ids + ")");
      }
      lr = one_cycle_lr(step, total_steps, config.peak_lr, config.schedule);
      optimizer.step(lr);
      ++step;
      loss_sum += lr_result.loss * static_cast<double>(end - begin);
    }
    m.mode = Mode::Eval;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.lr = lr;
    if (val_set.size() > 0) rec.val_loss = dataset_loss(m, val_set, config.loss);
    result.history.push_back(rec);

    const double selection = rec.val_loss.value_or(rec.train_loss);
    if (result.best_epoch < 0 || selection < result.best_selection_loss) {
      result.best_epoch = epoch;
      result.best_selection_loss = selection;
      if (!config.checkpoint_path.empty()) save_with_sidecar(m, config);
    }
  }
  m.mode = Mode::Eval;
  return result;
}

TrainResult train(const TrainConfig& config, const PreparedSet& train_set, const PreparedSet& val_set) {
  config.validate();
  return train_from(SformerModel::initialized(config.model, config.seed), config, train_set, val_set);
}

TrainResult finetune(const std::filesystem::path& checkpoint, const TrainConfig& config,
                     const PreparedSet& train_set, const PreparedSet& val_set) {
  const ModelConfig stored = read_checkpoint_config(checkpoint);
  std::string diff;
  auto compare = [&diff](const char* field, int have, int want) {
    if (have != want) {
      diff += std::string(diff.empty() ? "" : "; ") + field + ": checkpoint " + std::to_string(have) +
              " vs config " + std::to_string(want);
    }
  };
  compare("H", stored.hidden, config.model.hidden);
  compare("node_layers", stored.node_layers, config.model.node_layers);
  compare("edge_node_layers", stored.edge_node_layers, config.model.edge_node_layers);
  compare("head_hidden", stored.head_hidden, config.model.head_hidden);
  if (!diff.empty()) throw Error(ErrorKind::CheckpointMismatch, "incompatible checkpoint: " + diff);
  return train_from(load_checkpoint(checkpoint), config, train_set, val_set);
}

MetricsReport compute_metrics(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty() || y.size() != yhat.size()) {
    throw Error(ErrorKind::InvalidArgument, "metrics need equal-length, nonempty inputs");
  }
  const double n = static_cast<double>(y.size());
  MetricsReport r;
  r.count = y.size();
  double y_mean = 0.0, p_mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y_mean += y[i];
    p_mean += yhat[i];
  }
  y_mean /= n;
  p_mean /= n;
  double abs_err = 0.0, sq_err = 0.0, ss_tot = 0.0, abs_dev = 0.0, cov = 0.0, p_var = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - yhat[i];
    abs_err += std::abs(e);
    sq_err += e * e;
    const double dy = y[i] - y_mean;
    const double dp = yhat[i] - p_mean;
    ss_tot += dy * dy;
    abs_dev += std::abs(dy);
    cov += dy * dp;
    p_var += dp * dp;
  }
  r.mae = abs_err / n;
  r.mse = sq_err / n;
  r.rmse = std::sqrt(r.mse);
  r.mad = abs_dev / n;
  if (r.mae > 0.0) r.mad_mae_ratio = r.mad / r.mae;
  if (ss_tot > 0.0) {
    r.cod = 1.0 - sq_err / ss_tot;
  } else {
    r.status = "zero_variance";
  }
  if (ss_tot > 0.0 && p_var > 0.0) {
    r.pcc = std::clamp(cov / std::sqrt(ss_tot * p_var), -1.0, 1.0);
  } else {
    r.status = "zero_variance";
  }
  return r;
}

MetricsReport evaluate(SformerModel& model, const PreparedSet& data) {
  if (data.size() == 0) throw Error(ErrorKind::InvalidArgument, "evaluation set is empty");
  const Mode saved = model.mode;
  model.mode = Mode::Eval;
  const auto preds = predict(model, data.samples());
  model.mode = saved;
  return compute_metrics(data.targets, preds);
}

std::vector<Fold> kfold_split(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "folds must be >= 2");
  if (n < static_cast<std::size_t>(folds)) {
    throw Error(ErrorKind::TooFewSamples,
                "need at least " + std::to_string(folds) + " samples, got " + std::to_string(n));
  }
  const auto order = seeded_permutation(n, seed);
  const std::size_t f = static_cast<std::size_t>(folds);
  const std::size_t base = n / f;
  const std::size_t extra = n % f;
  std::vector<Fold> out(f);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < f; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    out[k].test.assign(order.begin() + static_cast<long>(pos), order.begin() + static_cast<long>(pos + len));
    pos += len;
  }
  for (std::size_t k = 0; k < f; ++k) {
    for (std::size_t j = 0; j < f; ++j) {
      if (j != k) out[k].train.insert(out[k].train.end(), out[j].test.begin(), out[j].test.end());
    }
  }
  return out;
}

std::string history_to_jsonl(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    json j = {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"lr", r.lr}};
    j["val_loss"] = r.val_loss ? json(*r.val_loss) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string metrics_to_json(const MetricsReport& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"count", m.count}, {"mae", m.mae}, {"mse", m.mse}, {"rmse", m.rmse}, {"mad", m.mad},
            {"cod", opt(m.cod)}, {"pcc", opt(m.pcc)}, {"mad_mae_ratio", opt(m.mad_mae_ratio)},
            {"status", m.status}};
  return j.dump(2);
}

std::string config_to_json(const TrainConfig& c) {
  json j = {{"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"peak_lr", c.peak_lr},
            {"weight_decay", c.weight_decay},
            {"loss", to_string(c.loss)},
            {"k_neighbors", c.k_neighbors},
            {"seed", c.seed},
            {"model",
             {{"hidden", c.model.hidden},
              {"node_layers", c.model.node_layers},
              {"edge_node_layers", c.model.edge_node_layers},
              {"head_hidden", c.model.head_hidden}}},
            {"schedule",
             {{"warmup_fraction", c.schedule.warmup_fraction},
              {"start_div", c.schedule.start_div},
              {"end_div", c.schedule.end_div}}},
            {"adamw", {{"beta1", c.adamw.beta1}, {"beta2", c.adamw.beta2}, {"epsilon", c.adamw.epsilon}}}};
  return j.dump(2);
}

}  // namespace qcnet
