// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "cmlab/noise_schedule.hpp"
#include "cmlab/sampler.hpp"
#include "cmlab/target_dist.hpp"

namespace cmlab {

struct TailConstants {
  double c = 1.0;
  double C = 1.0;
  double coeff = 1.0;  // constant in front of R exp(-R / 2C)
};

/// Inputs shared by the error-bound evaluators. tau_N is taus.last().
struct BoundInputs {
  BoundInputs(NoiseSchedule schedule, SamplingTimeSchedule taus, double eps_over_delta)
      : schedule(std::move(schedule)), taus(std::move(taus)), eps_over_delta(eps_over_delta) {}

  /// Fills radius, diameter, second moment and L from the target.
  BoundInputs& with_geometry(const Geometry& g);

  NoiseSchedule schedule;
  SamplingTimeSchedule taus;
  double eps_over_delta;
  std::optional<double> radius;
  std::optional<double> diameter;
  std::optional<double> second_moment;
  double dim = 1.0;
  std::optional<double> log_smoothness;
  std::optional<double> sigma_eps;
  std::optional<TailConstants> tail;
};

/// Total = lead * (term_i + term_ii)^{1/4} + term_iii.
struct W2Bound {
  double total = 0.0;
  double term_i = 0.0;
  double term_ii = 0.0;
  double term_iii = 0.0;
};

struct TvBound {
  double total = 0.0;
  double kl_term = 0.0;         // sqrt(alpha^2 E|x|^2 / 4 sigma^2 + sum ...)
  double cm_term = 0.0;         // tau_N (eps/delta) / (2 sigma_eps)
  double smoothing_term = 0.0;  // 2 d L sigma_eps
};

struct TailBound {
  double total = 0.0;
  double tail_term = 0.0;
  W2Bound base;
};

/// Bounded-support W2 bound with leading factor 2R and term (i) = alpha^2 R^2 / 4 sigma^2.
W2Bound w2_bound_general(const BoundInputs& in);
/// Refined form: leading factor diameter and term (i) = alpha^2 E|x|^2 / 2 sigma^2.
W2Bound w2_bound_modified(const BoundInputs& in);
TvBound tv_bound(const BoundInputs& in);
TailBound w2_bound_tail(const BoundInputs& in);
/// Upper bound on KL(P_{tau_i} || P_hat_{tau_i}), stage i in 1..N.
double kl_bound(const BoundInputs& in, std::size_t stage);
/// alpha_t^2 / (2 sigma_t^2) * w2_sq.
double sde_contraction_bound(const NoiseSchedule& schedule, double t, double w2_sq);

}  // namespace cmlab
