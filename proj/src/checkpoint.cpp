// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include <bit>
#include <cstring>
#include <fstream>

#include "qcnet/error.hpp"
#include "qcnet/sformer.hpp"

namespace qcnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes host doubles and assumes little endian");

namespace {

struct Header {
  std::uint32_t version = kCheckpointVersion;
  std::uint32_t hidden = 0;
  std::uint32_t node_layers = 0;
  std::uint32_t edge_node_layers = 0;
  std::uint32_t head_hidden = 0;
  std::uint64_t tensors = 0;
};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "truncated checkpoint " + path.string());
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size()) * static_cast<std::streamsize>(sizeof(double)));
}

void get_matrix(std::istream& in, Matrix& m, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size()) * static_cast<std::streamsize>(sizeof(double)));
  if (!in) throw Error(ErrorKind::Io, "truncated checkpoint " + path.string());
}

std::size_t tensor_count(const SformerModel& model) {
  return model.parameters().size() + 2 * model.batch_norms().size();
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::CheckpointMismatch, path.string() + ": not a qcnet checkpoint (bad magic)");
  }
  Header h;
  h.version = get<std::uint32_t>(in, path);
  if (h.version != kCheckpointVersion) {
    throw Error(ErrorKind::CheckpointMismatch,
                path.string() + ": unsupported checkpoint version " + std::to_string(h.version));
  }
  h.hidden = get<std::uint32_t>(in, path);
  h.node_layers = get<std::uint32_t>(in, path);
  h.edge_node_layers = get<std::uint32_t>(in, path);
  h.head_hidden = get<std::uint32_t>(in, path);
  h.tensors = get<std::uint64_t>(in, path);
  return h;
}

}  // namespace

void save_checkpoint(const SformerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint " + path.string());
  const auto& cfg = model.config();
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.node_layers));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.edge_node_layers));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.head_hidden));
  put<std::uint64_t>(out, tensor_count(model));
  for (const Param* p : model.parameters()) put_matrix(out, p->value);
  for (const BatchNormParams* bn : model.batch_norms()) {
    put_matrix(out, bn->running_mean);
    put_matrix(out, bn->running_var);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint " + path.string());
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint " + path.string());
  const Header h = read_header(in, path);
  return {static_cast<int>(h.hidden), static_cast<int>(h.node_layers),
          static_cast<int>(h.edge_node_layers), static_cast<int>(h.head_hidden)};
}

SformerModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint " + path.string());
  const Header h = read_header(in, path);
  SformerModel model(ModelConfig{static_cast<int>(h.hidden), static_cast<int>(h.node_layers),
                                 static_cast<int>(h.edge_node_layers), static_cast<int>(h.head_hidden)});
  if (h.tensors != tensor_count(model)) {
    throw Error(ErrorKind::CheckpointMismatch, path.string() + ": tensor count " +
                                                   std::to_string(h.tensors) + " does not match header");
  }
  for (Param* p : model.parameters()) get_matrix(in, p->value, path);
  for (BatchNormParams* bn : model.batch_norms()) {
    get_matrix(in, bn->running_mean, path);
    get_matrix(in, bn->running_var, path);
  }
  in.peek();
  if (!in.eof()) throw Error(ErrorKind::CheckpointMismatch, path.string() + ": trailing bytes");
  model.mode = Mode::Eval;
  return model;
}

}  // namespace qcnet
