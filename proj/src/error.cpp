// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/error.hpp"

#include "qcnet/structure.hpp"

namespace qcnet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::DegenerateLattice: return "DegenerateLattice";
    case ErrorKind::UnknownSpecies: return "UnknownSpecies";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::RadiusTooSmall: return "RadiusTooSmall";
    case ErrorKind::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorKind::NonPositiveDistance: return "NonPositiveDistance";
    case ErrorKind::MissingSpecies: return "MissingSpecies";
    case ErrorKind::EmptyComplex: return "EmptyComplex";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::CheckpointMismatch: return "CheckpointMismatch";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::SubcomplexViolation: return "SubcomplexViolation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidData: return "DataError";
  }
  return "Unknown";
}

namespace {

std::string located(const std::string& what, int line, const std::string& field) {
  std::string out = what;
  if (line > 0) out += " (line " + std::to_string(line) + ")";
  if (!field.empty()) out += " [field '" + field + "']";
  return out;
}

}  // namespace

MalformedInput::MalformedInput(const std::string& what, int line, std::string field)
    : Error(ErrorKind::MalformedInput, located(what, line, field)),
      line_(line),
      field_(std::move(field)) {}

MissingSpecies::MissingSpecies(int z)
    : Error(ErrorKind::MissingSpecies,
            "atom feature table has no entry for Z=" + std::to_string(z) + " (" +
                std::string(element_symbol(z)) + ")"),
      z_(z) {}

}  // namespace qcnet
