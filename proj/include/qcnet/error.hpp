// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#pragma once

#include <stdexcept>
#include <string>

namespace qcnet {

/// Broad failure category; the CLI maps these onto its exit codes.
enum class ErrorKind {
  MalformedInput,
  DegenerateLattice,
  UnknownSpecies,
  Schema,
  Io,
  RadiusTooSmall,
  InsufficientCandidates,
  NonPositiveDistance,
  MissingSpecies,
  EmptyComplex,
  NonFiniteLoss,
  CheckpointMismatch,
  TooFewSamples,
  SubcomplexViolation,
  InvalidArgument,
  InvalidData,  // a dataset record that cannot be used
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure carrying the 1-based line (0 when not line-oriented) and field.
class MalformedInput : public Error {
 public:
  MalformedInput(const std::string& what, int line = 0, std::string field = {});

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

class MissingSpecies : public Error {
 public:
  explicit MissingSpecies(int z);
  int atomic_number() const noexcept { return z_; }

 private:
  int z_;
};

}  // namespace qcnet
