// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cmlab/core.hpp"

namespace cmlab {

enum class ScheduleKind { OU, VE, Custom };

/// Forward-process noise schedule: x_t | x_0 ~ N(alpha(t) x_0, sigma2(t) I).
///
/// Built-in kinds are valid on [0, inf). Custom schedules are valid on
/// [0, t_max()] and must satisfy alpha(0) = 1, sigma2(0) = 0, alpha > 0 and a
/// nondecreasing sigma2; tabulated input is checked on construction.
class NoiseSchedule {
 public:
  using Curve = std::function<double(double)>;

  static NoiseSchedule ou();
  static NoiseSchedule ve();
  static NoiseSchedule custom(Curve alpha, Curve sigma2,
                              double t_max = std::numeric_limits<double>::infinity());
  /// Monotone-cubic interpolation through (t, alpha, sigma2) knots; t[0] must be 0.
  static NoiseSchedule tabulated(std::vector<double> t, std::vector<double> alpha,
                                 std::vector<double> sigma2);
  /// CSV with a header row and columns t,alpha,sigma2.
  static NoiseSchedule from_csv(const std::filesystem::path& path);
  /// "ou" | "ve" | path to a CSV table.
  static NoiseSchedule parse(const std::string& spec);

  ScheduleKind kind() const { return kind_; }
  double t_max() const { return t_max_; }

  double alpha(double t) const;
  double sigma2(double t) const;

 private:
  NoiseSchedule(ScheduleKind kind, Curve alpha, Curve sigma2, double t_max)
      : kind_(kind), alpha_(std::move(alpha)), sigma2_(std::move(sigma2)), t_max_(t_max) {}

  ScheduleKind kind_;
  Curve alpha_;
  Curve sigma2_;
  double t_max_;
};

struct DriftDiffusion {
  double h;   // d log alpha / dt
  double g2;  // d sigma2 / dt - 2 h sigma2
};

/// SDE coefficients of dx = h(t) x dt + g(t) dW. Closed form for OU/VE,
/// central differences with step min(1e-6, t/2) for custom schedules.
DriftDiffusion drift_diffusion(const NoiseSchedule& s, double t);

/// alpha(t)^2 / sigma2(t); throws DomainError for t <= 0.
double contraction(const NoiseSchedule& s, double t);

/// Uniform grid t_i = i * delta, i = 0..m.
class TrainingPartition {
 public:
  TrainingPartition(double delta, long m);

  double delta() const { return delta_; }
  long m() const { return m_; }
  double horizon() const { return delta_ * static_cast<double>(m_); }
  double point(long i) const;

  /// Index of the nearest grid point, ties rounding up, clamped to [0, m].
  long nearest_index(double t) const;
  double round(double t) const { return point(nearest_index(t)); }
  bool contains(double t, double tol = 1e-12) const;

 private:
  double delta_;
  long m_;
};

/// drift_diffusion restricted to the partition horizon [0, T].
DriftDiffusion drift_diffusion(const NoiseSchedule& s, const TrainingPartition& p, double t);

}  // namespace cmlab
