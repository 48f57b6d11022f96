// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qcnet {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A periodic crystal: lattice rows l1, l2, l3 (Angstrom), atomic numbers and
/// fractional coordinates. Fractional coordinates are authoritative; Cartesian
/// positions are always derived as frac · lattice.
struct CrystalStructure {
  Mat3 lattice = Mat3::Identity();
  std::vector<int> species;
  std::vector<Vec3> frac;
  std::optional<std::string> id;

  std::size_t size() const noexcept { return species.size(); }
  Vec3 cartesian(std::size_t i) const { return lattice.transpose() * frac[i]; }
  Vec3 cartesian(std::size_t i, const std::array<int, 3>& offset) const;

  bool operator==(const CrystalStructure& other) const;
};

enum class StructureFormat { Json, Poscar };
enum class SplitTag { Train, Val, Test };

struct DatasetRecord {
  CrystalStructure structure;
  double target = 0.0;
  std::optional<SplitTag> split;
};

struct LineDiagnostic {
  int line = 0;
  std::string message;
};

struct DatasetLoad {
  std::vector<DatasetRecord> records;
  std::vector<LineDiagnostic> diagnostics;
};

inline constexpr double kMinCellVolume = 1e-8;
inline constexpr int kMaxAtomicNumber = 118;

/// Wraps a single fractional coordinate into [0, 1).
double wrap_unit(double x);

/// Wraps every coordinate into [0, 1) and validates lattice and species.
/// Throws DegenerateLattice / UnknownSpecies / MalformedInput.
CrystalStructure canonicalize(CrystalStructure s);

CrystalStructure parse_structure(std::string_view text, StructureFormat format);
std::string write_structure(const CrystalStructure& s,
                            StructureFormat format = StructureFormat::Json);

CrystalStructure read_structure_file(const std::filesystem::path& path);

DatasetLoad load_dataset(const std::filesystem::path& path);
DatasetLoad parse_dataset(std::string_view text);
std::string write_dataset_record(const DatasetRecord& r);

std::string_view element_symbol(int z);
/// Returns 0 for an unknown symbol.
int atomic_number(std::string_view symbol);

std::string to_string(SplitTag tag);

}  // namespace qcnet
