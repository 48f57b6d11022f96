// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qcnet/autograd.hpp"
#include "qcnet/featurize.hpp"
#include "qcnet/qcomplex.hpp"

namespace qcnet {

enum class Mode { Train, Eval };
enum class LossKind { Mse, Mae };

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind kind);

/// Parameters of one simplex-transformer layer acting on n-simplices whose
/// messages travel through (n+1)-cofaces.
struct SformerLayerParams {
  LinearParams query;          // Q_n
  LinearParams key;            // K_n
  LinearParams value;          // V_n
  LinearParams coface_key;     // K_{n+1}
  LinearParams coface_value;   // V_{n+1}
  LinearParams key_mlp;        // 2H -> 2H
  LinearParams value_mlp;      // 2H -> 2H
  BatchNormParams attention_norm;  // 2H, over the message population
  LinearParams message;        // 2H -> H
  LayerNormParams message_norm;
  LinearParams update;         // H -> H
  BatchNormParams update_norm;

  SformerLayerParams() = default;
  SformerLayerParams(const std::string& name, int hidden);

  std::vector<Param*> parameters();
  std::vector<BatchNormParams*> batch_norms();
};

struct EdgeNodeBlock {
  SformerLayerParams edge_layer;  // edges from triangles
  SformerLayerParams node_layer;  // vertices from the refreshed edges
};

struct ModelConfig {
  int hidden = kHiddenDim;
  int node_layers = 5;
  int edge_node_layers = 2;
  int head_hidden = 64;

  bool operator==(const ModelConfig&) const = default;
};

class SformerModel {
 public:
  explicit SformerModel(const ModelConfig& config = {});

  /// Kaiming-style uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
  /// weights and biases; norm scales 1, shifts 0.
  static SformerModel initialized(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  int hidden() const { return config_.hidden; }

  Mode mode = Mode::Eval;
  EmbeddingParams embed;
  std::vector<SformerLayerParams> node_layers;
  std::vector<EdgeNodeBlock> edge_node_layers;
  LinearParams head_in;      // 2H -> head_hidden
  LinearParams head_hidden;  // head_hidden -> head_hidden
  LinearParams head_out;     // head_hidden -> 1

  /// Every learnable tensor in declared (checkpoint) order.
  std::vector<Param*> parameters();
  std::vector<const Param*> parameters() const;
  std::vector<BatchNormParams*> batch_norms();
  std::vector<const BatchNormParams*> batch_norms() const;
  std::size_t parameter_count() const;

  void zero_grad();

 private:
  ModelConfig config_;
};

/// Precomputed message routes for a single complex.
struct MessageRoutes {
  std::vector<int> receiver;
  std::vector<int> neighbor;
  std::vector<int> coface;
};

MessageRoutes vertex_routes(const QuotientComplex& c);
MessageRoutes edge_routes(const QuotientComplex& c);

/// One graph of a minibatch.
struct Sample {
  const QuotientComplex* complex = nullptr;
  const FeatureSet* features = nullptr;
  double target = 0.0;
};

/// Disjoint union of several complexes with global indices.
struct BatchGraph {
  Matrix vertex_raw;
  Matrix edge_raw;
  Matrix triangle_raw;
  MessageRoutes vertex_msgs;
  MessageRoutes edge_msgs;
  std::vector<int> vertex_graph;
  std::vector<int> edge_graph;
  std::vector<double> targets;
  int graphs = 0;
};

BatchGraph make_batch(std::span<const Sample> samples);

/// Messages m_(sigma,tau)_s for every route (rows follow `routes`), Eqs. 1-4.
ad::Var attention_messages(ad::Tape& tape, SformerLayerParams& layer, ad::Var h, ad::Var h_coface,
                           const MessageRoutes& routes, bool training);

/// h + SiLU(BN(Linear(sum SiLU(LayerNorm(Linear(m)))))).
ad::Var layer_update(ad::Tape& tape, SformerLayerParams& layer, ad::Var h, ad::Var h_coface,
                     const MessageRoutes& routes, bool training);

/// Full model forward on the tape; returns the graphs x 1 prediction.
ad::Var forward(ad::Tape& tape, SformerModel& model, const BatchGraph& batch);

/// Pure helpers (no gradients recorded for the caller).
Matrix attention_message_values(SformerLayerParams& layer, const Matrix& h, const Matrix& h_coface,
                                const MessageRoutes& routes, Mode mode);
Matrix layer_update_values(SformerLayerParams& layer, const Matrix& h, const Matrix& h_coface,
                           const MessageRoutes& routes, Mode mode);

/// Predictions for each sample under the model's current mode; running
/// statistics are not modified.
std::vector<double> predict(SformerModel& model, std::span<const Sample> samples);
double predict_one(SformerModel& model, const QuotientComplex& c, const FeatureSet& f);

struct LossResult {
  double loss = 0.0;
  std::vector<Matrix> gradients;  // parameters() order
};

/// Mean batch loss and its gradients. Parameter grads are reset first and left
/// populated. In train mode the batch statistics are used but running
/// statistics are only updated when `commit_stats` is true.
LossResult loss_and_gradients(SformerModel& model, std::span<const Sample> batch, LossKind loss,
                              bool commit_stats = false);

inline constexpr char kCheckpointMagic[8] = {'Q', 'C', 'N', 'E', 'T', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint: magic, version, H, layer counts, head width, tensor count,
/// then parameters and batch-norm running statistics as little-endian float64.
void save_checkpoint(const SformerModel& model, const std::filesystem::path& path);
SformerModel load_checkpoint(const std::filesystem::path& path);
/// Header-only read.
ModelConfig read_checkpoint_config(const std::filesystem::path& path);

}  // namespace qcnet
