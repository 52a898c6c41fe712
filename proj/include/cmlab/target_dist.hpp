// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cmlab/core.hpp"
#include "cmlab/noise_schedule.hpp"

namespace cmlab {

enum class TargetKind { Discrete, GaussianMixture };

/// Isotropic Gaussian component N(mean, variance * I). Atoms have variance 0.
struct Component {
  Vector mean;
  double variance = 0.0;
  double weight = 1.0;
};

/// Data distribution: a finite set of atoms or an isotropic Gaussian mixture.
class TargetDistribution {
 public:
  static TargetDistribution discrete(std::vector<std::pair<Vector, double>> atoms);
  static TargetDistribution gaussian_mixture(std::vector<Component> components,
                                             std::optional<double> log_smoothness = {});
  /// Two equally weighted atoms on the real line.
  static TargetDistribution two_point(double lo, double hi);

  TargetKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const std::vector<Component>& components() const { return components_; }
  /// Configured L for mixtures; exact 1/v for a single Gaussian.
  std::optional<double> log_smoothness() const { return log_smoothness_; }

 private:
  TargetDistribution(TargetKind kind, std::vector<Component> components,
                     std::optional<double> log_smoothness);

  TargetKind kind_;
  Eigen::Index dim_;
  std::vector<Component> components_;
  std::optional<double> log_smoothness_;
};

struct Geometry {
  double radius = 0.0;         // sup ||x||, mean-norm + 3 sd for Gaussian parts
  double diameter = 0.0;       // sup ||x - y||
  double second_moment = 0.0;  // E ||x||^2
  std::optional<double> log_smoothness;
  bool effective = false;  // radius/diameter are 3-sd effective supports
};

Geometry geometry(const TargetDistribution& target);

/// L from the geometry, or MissingInputError naming "L".
double require_log_smoothness(const Geometry& g);

/// Exact law of x_t: sum_k w_k N(alpha_t m_k, (alpha_t^2 v_k + sigma_t^2) I).
/// Also usable for any isotropic mixture via from_mixture.
class MarginalView {
 public:
  MarginalView(const TargetDistribution& target, const NoiseSchedule& schedule, double t);
  static MarginalView from_mixture(std::vector<Component> mixture);

  double t() const { return t_; }
  Eigen::Index dim() const { return dim_; }
  const std::vector<Component>& components() const { return mixture_; }

  double pdf(const Vector& x) const;
  double log_pdf(const Vector& x) const;
  Vector score(const Vector& x) const;

  // 1-D fast paths.
  double pdf(double x) const;
  double score(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;

  double mean_1d() const;
  double variance_1d() const;

  Samples sample(std::size_t n, std::uint64_t seed) const;

 private:
  explicit MarginalView(std::vector<Component> mixture, double t);
  void require_density() const;
  void require_1d() const;

  std::vector<Component> mixture_;
  double t_;
  Eigen::Index dim_;
  bool degenerate_;  // some component has zero variance
};

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace cmlab
