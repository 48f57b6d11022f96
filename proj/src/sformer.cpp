// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/sformer.hpp"

#include <cmath>

#include "qcnet/error.hpp"

namespace qcnet {

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mse") return LossKind::Mse;
  if (name == "mae") return LossKind::Mae;
  throw Error(ErrorKind::InvalidArgument, "unknown loss '" + name + "' (expected mse or mae)");
}

std::string to_string(LossKind kind) { return kind == LossKind::Mse ? "mse" : "mae"; }

SformerLayerParams::SformerLayerParams(const std::string& name, int hidden)
    : query(name + ".query", hidden, hidden, false),
      key(name + ".key", hidden, hidden, false),
      value(name + ".value", hidden, hidden, false),
      coface_key(name + ".coface_key", hidden, hidden, false),
      coface_value(name + ".coface_value", hidden, hidden, false),
      key_mlp(name + ".key_mlp", 2 * hidden, 2 * hidden),
      value_mlp(name + ".value_mlp", 2 * hidden, 2 * hidden),
      attention_norm(name + ".attention_norm", 2 * hidden),
      message(name + ".message", 2 * hidden, hidden),
      message_norm(name + ".message_norm", hidden),
      update(name + ".update", hidden, hidden),
      update_norm(name + ".update_norm", hidden) {}

std::vector<Param*> SformerLayerParams::parameters() {
  std::vector<Param*> out;
  for (LinearParams* lin : {&query, &key, &value, &coface_key, &coface_value, &key_mlp, &value_mlp}) {
    out.push_back(&lin->weight);
    if (lin->has_bias()) out.push_back(&lin->bias);
  }
  out.push_back(&attention_norm.gamma);
  out.push_back(&attention_norm.beta);
  out.push_back(&message.weight);
  out.push_back(&message.bias);
  out.push_back(&message_norm.gamma);
  out.push_back(&message_norm.beta);
  out.push_back(&update.weight);
  out.push_back(&update.bias);
  out.push_back(&update_norm.gamma);
  out.push_back(&update_norm.beta);
  return out;
}

std::vector<BatchNormParams*> SformerLayerParams::batch_norms() {
  return {&attention_norm, &update_norm};
}

SformerModel::SformerModel(const ModelConfig& config)
    : embed(config.hidden),
      head_in("head.in", 2 * config.hidden, config.head_hidden),
      head_hidden("head.hidden", config.head_hidden, config.head_hidden),
      head_out("head.out", config.head_hidden, 1),
      config_(config) {
  if (config.hidden < 1 || config.head_hidden < 1 || config.node_layers < 0 ||
      config.edge_node_layers < 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid model configuration");
  }
  for (int i = 0; i < config.node_layers; ++i) {
    node_layers.emplace_back("node." + std::to_string(i), config.hidden);
  }
  for (int i = 0; i < config.edge_node_layers; ++i) {
    const std::string base = "edge_node." + std::to_string(i);
    edge_node_layers.push_back({SformerLayerParams(base + ".edge", config.hidden),
                                SformerLayerParams(base + ".node", config.hidden)});
  }
}

namespace {

/// Deterministic uniform stream; independent of the standard library's
/// distribution implementations so checkpoints are reproducible everywhere.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : state_(seed) {}
  double next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

void init_linear(LinearParams& lin, UniformStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(lin.in_features()));
  for (Eigen::Index i = 0; i < lin.weight.value.size(); ++i) {
    lin.weight.value.data()[i] = (2.0 * rng.next() - 1.0) * bound;
  }
  for (Eigen::Index i = 0; i < lin.bias.value.size(); ++i) {
    lin.bias.value.data()[i] = (2.0 * rng.next() - 1.0) * bound;
  }
}

void init_layer(SformerLayerParams& layer, UniformStream& rng) {
  for (LinearParams* lin : {&layer.query, &layer.key, &layer.value, &layer.coface_key,
                            &layer.coface_value, &layer.key_mlp, &layer.value_mlp, &layer.message,
                            &layer.update}) {
    init_linear(*lin, rng);
  }
}

}  // namespace

SformerModel SformerModel::initialized(const ModelConfig& config, std::uint64_t seed) {
  SformerModel model(config);
  UniformStream rng(seed);
  init_linear(model.embed.vertex, rng);
  init_linear(model.embed.edge, rng);
  init_linear(model.embed.triangle, rng);
  for (auto& layer : model.node_layers) init_layer(layer, rng);
  for (auto& block : model.edge_node_layers) {
    init_layer(block.edge_layer, rng);
    init_layer(block.node_layer, rng);
  }
  init_linear(model.head_in, rng);
  init_linear(model.head_hidden, rng);
  init_linear(model.head_out, rng);
  return model;
}

std::vector<Param*> SformerModel::parameters() {
  std::vector<Param*> out;
  for (LinearParams* lin : {&embed.vertex, &embed.edge, &embed.triangle}) {
    out.push_back(&lin->weight);
    out.push_back(&lin->bias);
  }
  auto append = [&out](SformerLayerParams& layer) {
    auto p = layer.parameters();
    out.insert(out.end(), p.begin(), p.end());
  };
  for (auto& layer : node_layers) append(layer);
  for (auto& block : edge_node_layers) {
    append(block.edge_layer);
    append(block.node_layer);
  }
  for (LinearParams* lin : {&head_in, &head_hidden, &head_out}) {
    out.push_back(&lin->weight);
    out.push_back(&lin->bias);
  }
  return out;
}

std::vector<const Param*> SformerModel::parameters() const {
  auto mutable_params = const_cast<SformerModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::vector<BatchNormParams*> SformerModel::batch_norms() {
  std::vector<BatchNormParams*> out;
  for (auto& layer : node_layers) {
    for (auto* bn : layer.batch_norms()) out.push_back(bn);
  }
  for (auto& block : edge_node_layers) {
    for (auto* bn : block.edge_layer.batch_norms()) out.push_back(bn);
    for (auto* bn : block.node_layer.batch_norms()) out.push_back(bn);
  }
  return out;
}

std::vector<const BatchNormParams*> SformerModel::batch_norms() const {
  auto mutable_bns = const_cast<SformerModel*>(this)->batch_norms();
  return {mutable_bns.begin(), mutable_bns.end()};
}

std::size_t SformerModel::parameter_count() const {
  std::size_t total = 0;
  for (const Param* p : parameters()) total += static_cast<std::size_t>(p->value.size());
  return total;
}

void SformerModel::zero_grad() {
  for (Param* p : parameters()) p->zero_grad();
}

MessageRoutes vertex_routes(const QuotientComplex& c) {
  MessageRoutes r;
  for (int v = 0; v < c.n_vertices(); ++v) {
    for (const auto& pair : vertex_messaging_pairs(c, v)) {
      r.receiver.push_back(v);
      r.neighbor.push_back(pair.neighbor);
      r.coface.push_back(pair.coface);
    }
  }
  return r;
}

MessageRoutes edge_routes(const QuotientComplex& c) {
  MessageRoutes r;
  for (int e = 0; e < c.n_edges(); ++e) {
    for (const auto& pair : edge_messaging_pairs(c, e)) {
      r.receiver.push_back(e);
      r.neighbor.push_back(pair.neighbor);
      r.coface.push_back(pair.coface);
    }
  }
  return r;
}

BatchGraph make_batch(std::span<const Sample> samples) {
  BatchGraph b;
  b.graphs = static_cast<int>(samples.size());
  Eigen::Index n = 0, m = 0, t = 0;
  for (const auto& s : samples) {
    if (s.complex->n_vertices() == 0) throw Error(ErrorKind::EmptyComplex, "complex has no vertices");
    if (s.features->h0_raw.rows() != s.complex->n_vertices() ||
        s.features->h1_raw.rows() != s.complex->n_edges() ||
        s.features->h2_raw.rows() != s.complex->n_triangles()) {
      throw Error(ErrorKind::InvalidArgument, "feature rows do not match the complex");
    }
    n += s.complex->n_vertices();
    m += s.complex->n_edges();
    t += s.complex->n_triangles();
  }
  b.vertex_raw.resize(n, kVertexFeatureDim);
  b.edge_raw.resize(m, kEdgeFeatureDim);
  b.triangle_raw.resize(t, kTriangleFeatureDim);
  int vo = 0, eo = 0, to = 0;
  for (int g = 0; g < b.graphs; ++g) {
    const auto& s = samples[static_cast<std::size_t>(g)];
    const auto& c = *s.complex;
    b.vertex_raw.middleRows(vo, c.n_vertices()) = s.features->h0_raw;
    b.edge_raw.middleRows(eo, c.n_edges()) = s.features->h1_raw;
    if (c.n_triangles() > 0) b.triangle_raw.middleRows(to, c.n_triangles()) = s.features->h2_raw;
    const auto vr = vertex_routes(c);
    for (std::size_t i = 0; i < vr.receiver.size(); ++i) {
      b.vertex_msgs.receiver.push_back(vr.receiver[i] + vo);
      b.vertex_msgs.neighbor.push_back(vr.neighbor[i] + vo);
      b.vertex_msgs.coface.push_back(vr.coface[i] + eo);
    }
    const auto er = edge_routes(c);
    for (std::size_t i = 0; i < er.receiver.size(); ++i) {
      b.edge_msgs.receiver.push_back(er.receiver[i] + eo);
      b.edge_msgs.neighbor.push_back(er.neighbor[i] + eo);
      b.edge_msgs.coface.push_back(er.coface[i] + to);
    }
    b.vertex_graph.insert(b.vertex_graph.end(), static_cast<std::size_t>(c.n_vertices()), g);
    b.edge_graph.insert(b.edge_graph.end(), static_cast<std::size_t>(c.n_edges()), g);
    b.targets.push_back(s.target);
    vo += c.n_vertices();
    eo += c.n_edges();
    to += c.n_triangles();
  }
  return b;
}

ad::Var attention_messages(ad::Tape& tape, SformerLayerParams& layer, ad::Var h, ad::Var h_coface,
                           const MessageRoutes& routes, bool training) {
  const double hidden = static_cast<double>(h->value.cols());
  ad::Var q = tape.gather_rows(tape.linear(h, layer.query), routes.receiver);
  ad::Var k_nbr = tape.gather_rows(tape.linear(h, layer.key), routes.neighbor);
  ad::Var v_nbr = tape.gather_rows(tape.linear(h, layer.value), routes.neighbor);
  ad::Var k_cof = tape.gather_rows(tape.linear(h_coface, layer.coface_key), routes.coface);
  ad::Var v_cof = tape.gather_rows(tape.linear(h_coface, layer.coface_value), routes.coface);

  ad::Var keys = tape.linear(tape.concat_cols(k_nbr, k_cof), layer.key_mlp);
  ad::Var alpha = tape.scale(tape.hadamard(tape.concat_cols(q, q), keys), 1.0 / std::sqrt(2.0 * hidden));
  ad::Var gate = tape.sigmoid(tape.batch_norm(alpha, layer.attention_norm, training));
  ad::Var values = tape.linear(tape.concat_cols(v_nbr, v_cof), layer.value_mlp);
  return tape.hadamard(gate, values);
}

ad::Var layer_update(ad::Tape& tape, SformerLayerParams& layer, ad::Var h, ad::Var h_coface,
                     const MessageRoutes& routes, bool training) {
  ad::Var m = attention_messages(tape, layer, h, h_coface, routes, training);
  ad::Var per_route = tape.silu(tape.layer_norm(tape.linear(m, layer.message), layer.message_norm));
  ad::Var aggregated = tape.scatter_add_rows(per_route, routes.receiver, h->value.rows());
  ad::Var delta = tape.silu(tape.batch_norm(tape.linear(aggregated, layer.update), layer.update_norm, training));
  return tape.add(h, delta);
}

ad::Var forward(ad::Tape& tape, SformerModel& model, const BatchGraph& batch) {
  if (batch.graphs == 0 || batch.vertex_raw.rows() == 0) {
    throw Error(ErrorKind::EmptyComplex, "forward on an empty batch");
  }
  const bool training = model.mode == Mode::Train;
  ad::Var h0 = tape.silu(tape.linear(tape.constant(batch.vertex_raw), model.embed.vertex));
  ad::Var h1 = tape.silu(tape.linear(tape.constant(batch.edge_raw), model.embed.edge));
  ad::Var h2 = tape.silu(tape.linear(tape.constant(batch.triangle_raw), model.embed.triangle));

  for (auto& layer : model.node_layers) {
    h0 = layer_update(tape, layer, h0, h1, batch.vertex_msgs, training);
  }
  for (auto& block : model.edge_node_layers) {
    h1 = layer_update(tape, block.edge_layer, h1, h2, batch.edge_msgs, training);
    h0 = layer_update(tape, block.node_layer, h0, h1, batch.vertex_msgs, training);
  }

  ad::Var pooled = tape.concat_cols(tape.segment_mean(h0, batch.vertex_graph, batch.graphs),
                                    tape.segment_mean(h1, batch.edge_graph, batch.graphs));
  ad::Var x = tape.silu(tape.linear(pooled, model.head_in));
  x = tape.silu(tape.linear(x, model.head_hidden));
  return tape.linear(x, model.head_out);
}

Matrix attention_message_values(SformerLayerParams& layer, const Matrix& h, const Matrix& h_coface,
                                const MessageRoutes& routes, Mode mode) {
  ad::Tape tape;
  return attention_messages(tape, layer, tape.constant(h), tape.constant(h_coface), routes,
                            mode == Mode::Train)
      ->value;
}

Matrix layer_update_values(SformerLayerParams& layer, const Matrix& h, const Matrix& h_coface,
                           const MessageRoutes& routes, Mode mode) {
  ad::Tape tape;
  return layer_update(tape, layer, tape.constant(h), tape.constant(h_coface), routes,
                      mode == Mode::Train)
      ->value;
}

std::vector<double> predict(SformerModel& model, std::span<const Sample> samples) {
  if (samples.empty()) return {};
  ad::Tape tape;
  const BatchGraph batch = make_batch(samples);
  ad::Var out = forward(tape, model, batch);
  std::vector<double> preds(static_cast<std::size_t>(out->value.rows()));
  for (Eigen::Index i = 0; i < out->value.rows(); ++i) preds[static_cast<std::size_t>(i)] = out->value(i, 0);
  return preds;
}

double predict_one(SformerModel& model, const QuotientComplex& c, const FeatureSet& f) {
  const Sample s{&c, &f, 0.0};
  return predict(model, std::span<const Sample>(&s, 1)).front();
}

LossResult loss_and_gradients(SformerModel& model, std::span<const Sample> batch, LossKind loss,
                              bool commit_stats) {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");
  model.zero_grad();
  ad::Tape tape;
  const BatchGraph graph = make_batch(batch);
  ad::Var pred = forward(tape, model, graph);
  ad::Var l = loss == LossKind::Mse ? tape.mse(pred, graph.targets) : tape.mae(pred, graph.targets);
  LossResult result;
  result.loss = l->value(0, 0);
  if (!std::isfinite(result.loss)) throw Error(ErrorKind::NonFiniteLoss, "loss is not finite");
  tape.backward(l);
  if (commit_stats) tape.commit_running_stats();
  for (Param* p : model.parameters()) result.gradients.push_back(p->grad);
  return result;
}

}  // namespace qcnet
