// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace cmlab {

using Vector = Eigen::VectorXd;
// One sample per row.
using Samples = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric precondition or domain violation (CLI exit code 3).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Density fell below the representable floor.
class UnderflowError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConvergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A required input (L, tail constants, ...) was not supplied.
class MissingInputError : public Error {
 public:
  MissingInputError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Invalid configuration; `field` is a JSON path such as "schedule".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace cmlab
