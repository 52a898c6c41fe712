// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "cmlab/consistency.hpp"
#include "cmlab/core.hpp"
#include "cmlab/noise_schedule.hpp"

namespace cmlab {

/// Sampling times tau_1 > tau_2 > ... > tau_N > 0.
class SamplingTimeSchedule {
 public:
  explicit SamplingTimeSchedule(std::vector<double> taus);

  const std::vector<double>& taus() const { return taus_; }
  std::size_t n_steps() const { return taus_.size(); }
  double first() const { return taus_.front(); }
  double last() const { return taus_.back(); }
  /// The leading `stages` times (1 <= stages <= N).
  SamplingTimeSchedule prefix(std::size_t stages) const;
  bool aligned_to(const TrainingPartition& p, double tol = 1e-12) const;

 private:
  std::vector<double> taus_;
};

/// Every intermediate stage of one multistep run.
struct TrajectoryRecord {
  std::vector<double> taus;
  std::vector<Samples> noisy;     // x_hat at tau_i
  std::vector<Samples> denoised;  // f_hat(x_hat_{tau_i}, tau_i)
  std::uint64_t seed = 0;

  const Samples& output() const { return denoised.back(); }
};

/// Multistep consistency sampling. Stage i noise comes from a stream keyed by
/// (seed, i), so the record is bit-identical for any thread count.
TrajectoryRecord multistep_sample(const ConsistencyFn& f_hat, const NoiseSchedule& schedule,
                                  const SamplingTimeSchedule& taus, Eigen::Index dim, std::size_t n,
                                  std::uint64_t seed);

/// tau_1 = log(R^3 delta^2 / eps^2), tau_2 = log(R^2 delta / eps), rounded onto p.
SamplingTimeSchedule design_two_step_ou(double radius, double eps, double delta,
                                        const TrainingPartition& p);
/// tau_i = T 2^{1-i} for i = 1..floor(log2(2T/delta)), the last one set to
/// delta; duplicates after rounding are dropped.
SamplingTimeSchedule design_halving_ve(double horizon, const TrainingPartition& p);
/// tau_i = T (N + 1 - i) / N; collisions after rounding are an error.
SamplingTimeSchedule design_uniform(double horizon, std::size_t n_steps, const TrainingPartition& p);

/// Adds iid N(0, sigma_eps^2 I) to every row.
Samples smooth_output(const Samples& samples, double sigma_eps, std::uint64_t seed);

/// sqrt(tau_N eps / (4 d L delta)), written in terms of eps/delta.
double sigma_eps_optimal(double tau_last, double eps_over_delta, double dim, double log_smoothness);

}  // namespace cmlab
