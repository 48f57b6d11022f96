// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qcnet/trainer.hpp"

namespace qcnet {

/// Training run description read from an INI-style file:
///
///   [data]      dataset, val_dataset, atom_table, output_dir
///   [train]     batch_size, epochs, peak_lr, weight_decay, loss, k_neighbors, seed
///   [model]     hidden, node_layers, edge_node_layers, head_hidden
///   [schedule]  warmup_fraction, start_div, end_div
///   [run]       threads
///
/// Relative paths are resolved against the directory holding the file. An
/// absent atom_table (or the value "placeholder") selects the seeded stand-in table.
struct RunConfig {
  TrainConfig train;
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> val_dataset;
  std::optional<std::filesystem::path> atom_table;
  std::filesystem::path output_dir = "qcnet-out";
  int threads = 1;
};

/// Throws Error(InvalidArgument) on unknown keys, bad values or missing files.
RunConfig parse_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_text(const std::string& text, const std::filesystem::path& base_dir);

/// Seed precedence: explicit flag, then the QCNET_SEED environment variable, then the file.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t from_config);

}  // namespace qcnet
