// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "cmlab/core.hpp"
#include "cmlab/noise_schedule.hpp"
#include "cmlab/target_dist.hpp"

namespace cmlab {

enum class ConsistencyKind {
  ExactTwoPoint,
  PfOde,
  QuantilePerturbed,
  ExactGaussian,
  GainPerturbed,
  Wrapped
};

/// Maps of the form x < threshold(t) -> lo, otherwise hi (one-dimensional).
struct ThresholdRule {
  double lo;
  double hi;
  std::function<double(double)> threshold;
};

/// Maps of the form f(x, t) = gain(t) x + shift(t).
struct AffineRule {
  std::function<double(double)> gain;
  std::function<Vector(double)> shift;
};

/// x0-predictor f(x, t). Every instance returns x unchanged at t = 0, and
/// for t > 0 its outputs are projected onto the ball of radius
/// output_radius().
class ConsistencyFn {
 public:
  /// Maps a block of points (one per row) at a fixed time t > 0.
  using BatchMap = std::function<Samples(const Samples&, double)>;

  ConsistencyFn(ConsistencyKind kind, BatchMap map, double output_radius,
                std::optional<ThresholdRule> rule = std::nullopt,
                std::optional<AffineRule> affine = std::nullopt);

  static ConsistencyFn wrap(BatchMap map, double output_radius);

  ConsistencyKind kind() const { return kind_; }
  double output_radius() const { return radius_; }
  const std::optional<ThresholdRule>& threshold_rule() const { return rule_; }
  const std::optional<AffineRule>& affine_rule() const { return affine_; }

  Vector eval(const Vector& x, double t) const;
  /// Row-parallel evaluation; deterministic for any thread count.
  Samples eval_batch(const Samples& x, double t) const;

 private:
  ConsistencyKind kind_;
  BatchMap map_;
  double radius_;
  std::optional<ThresholdRule> rule_;
  std::optional<AffineRule> affine_;
};

struct PfOdeSolverConfig {
  double step = 1e-3;
  double min_time_floor = 1e-6;
  /// Snap endpoints to the nearest atom; defaults to on for discrete targets.
  std::optional<bool> snap_to_atoms;
};

/// Fixed-step RK4 integrator of the probability-flow ODE
/// dx/ds = h(s) x - g^2(s) score_s(x) / 2 for the exact target marginals.
class PfOdeFlow {
 public:
  PfOdeFlow(TargetDistribution target, NoiseSchedule schedule, PfOdeSolverConfig cfg = {});

  const TargetDistribution& target() const { return target_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const PfOdeSolverConfig& config() const { return cfg_; }

  /// Moves each row from time `from` to time `to` (either direction).
  Samples transport(const Samples& x, double from, double to) const;

 private:
  TargetDistribution target_;
  NoiseSchedule schedule_;
  PfOdeSolverConfig cfg_;
};

/// Closed-form consistency function for two equally weighted atoms on the line.
ConsistencyFn exact_two_point(const TargetDistribution& target, const NoiseSchedule& schedule);

/// Integrates the PF-ODE from t down to the time floor, optionally snapping.
ConsistencyFn pf_ode_consistency(const TargetDistribution& target, const NoiseSchedule& schedule,
                                 PfOdeSolverConfig cfg = {});

/// Threshold map with a_t at the (0.5 + kappa t^2)-quantile of p_t, so that
/// E|f_hat - f|^2 = gap^2 kappa t^2.
ConsistencyFn quantile_perturbed(const TargetDistribution& target, const NoiseSchedule& schedule,
                                 double kappa = 1e-4);

/// Linear consistency function of a single isotropic Gaussian target.
ConsistencyFn exact_gaussian(const TargetDistribution& target, const NoiseSchedule& schedule);

/// f_hat = mu + (1 + eta t) (f - mu) for a single Gaussian target; its
/// evaluation error is eta^2 t^2 d v.
ConsistencyFn gain_perturbed(const TargetDistribution& target, const NoiseSchedule& schedule,
                             double eta);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error of the sample mean.
MonteCarloEstimate summarize(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Self-consistency loss between partition points t_i and t_{i+1}.
MonteCarloEstimate consistency_loss(const ConsistencyFn& f_hat, const PfOdeFlow& flow,
                                    const TrainingPartition& partition, long i, std::size_t n,
                                    std::uint64_t seed);

/// E_{x ~ view} ||f_hat(x, t) - f(x, t)||^2.
MonteCarloEstimate evaluation_error(const ConsistencyFn& f_hat, const ConsistencyFn& f,
                                    const MarginalView& view, std::size_t n, std::uint64_t seed);

}  // namespace cmlab
