// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qcnet/error.hpp"

namespace qcnet {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data", {"dataset", "val_dataset", "atom_table", "output_dir"}},
      {"train", {"batch_size", "epochs", "peak_lr", "weight_decay", "loss", "k_neighbors", "seed"}},
      {"model", {"hidden", "node_layers", "edge_node_layers", "head_hidden"}},
      {"schedule", {"warmup_fraction", "start_div", "end_div"}},
      {"run", {"threads"}},
  };
  return keys;
}

template <typename T>
T value_or(const pt::ptree& tree, const std::string& key, T fallback) {
  auto node = tree.get_child_optional(key);
  if (!node) return fallback;
  try {
    return node->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw Error(ErrorKind::InvalidArgument, "config key '" + key + "' has a bad value '" + node->data() + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end()) throw Error(ErrorKind::InvalidArgument, "config: unknown section [" + section + "]");
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) {
        throw Error(ErrorKind::InvalidArgument, "config: unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  RunConfig rc;
  auto& t = rc.train;
  const auto dataset = value_or<std::string>(tree, "data.dataset", "");
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "config: [data] dataset is required");
  rc.dataset = resolve(base_dir, dataset);
  if (auto v = value_or<std::string>(tree, "data.val_dataset", ""); !v.empty()) rc.val_dataset = resolve(base_dir, v);
  if (auto v = value_or<std::string>(tree, "data.atom_table", ""); !v.empty() && v != "placeholder") {
    rc.atom_table = resolve(base_dir, v);
  }
  rc.output_dir = resolve(base_dir, value_or<std::string>(tree, "data.output_dir", "qcnet-out"));

  t.batch_size = value_or(tree, "train.batch_size", t.batch_size);
  t.epochs = value_or(tree, "train.epochs", t.epochs);
  t.peak_lr = value_or(tree, "train.peak_lr", t.peak_lr);
  t.weight_decay = value_or(tree, "train.weight_decay", t.weight_decay);
  t.loss = parse_loss_kind(value_or<std::string>(tree, "train.loss", to_string(t.loss)));
  t.k_neighbors = value_or(tree, "train.k_neighbors", t.k_neighbors);
  t.seed = value_or<std::uint64_t>(tree, "train.seed", t.seed);
  t.model.hidden = value_or(tree, "model.hidden", t.model.hidden);
  t.model.node_layers = value_or(tree, "model.node_layers", t.model.node_layers);
  t.model.edge_node_layers = value_or(tree, "model.edge_node_layers", t.model.edge_node_layers);
  t.model.head_hidden = value_or(tree, "model.head_hidden", t.model.head_hidden);
  t.schedule.warmup_fraction = value_or(tree, "schedule.warmup_fraction", t.schedule.warmup_fraction);
  t.schedule.start_div = value_or(tree, "schedule.start_div", t.schedule.start_div);
  t.schedule.end_div = value_or(tree, "schedule.end_div", t.schedule.end_div);
  rc.threads = value_or(tree, "run.threads", rc.threads);
  if (rc.threads < 1) throw Error(ErrorKind::InvalidArgument, "config: threads must be >= 1");
  t.validate(/*allow_zero_epochs=*/true);

  auto require_file = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(ErrorKind::InvalidArgument, std::string("config: ") + what + " not found: " + p.string());
    }
  };
  require_file(rc.dataset, "dataset");
  if (rc.val_dataset) require_file(*rc.val_dataset, "val_dataset");
  if (rc.atom_table) require_file(*rc.atom_table, "atom_table");
  return rc;
}

RunConfig parse_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QCNET_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidArgument, std::string("QCNET_SEED is not an unsigned integer: ") + env);
  }
  return from_config;
}

}  // namespace qcnet
