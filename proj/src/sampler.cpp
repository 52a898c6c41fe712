// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/sampler.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cmlab/parallel.hpp"

namespace cmlab {
namespace {

constexpr std::uint64_t kStageStream = 0x7374616765ULL;
constexpr std::uint64_t kSmoothStream = 0x736d6f6f7468ULL;

// x + scale * N(0, I), rows drawn from chunk-keyed streams.
void add_noise(Samples& x, double scale, std::uint64_t seed) {
  parallel_chunks(static_cast<std::size_t>(x.rows()),
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    std::mt19937_64 rng(derive_seed(seed, 0, chunk));
                    std::normal_distribution<double> gauss(0.0, 1.0);
                    for (std::size_t i = begin; i < end; ++i)
                      for (Eigen::Index j = 0; j < x.cols(); ++j)
                        x(static_cast<Eigen::Index>(i), j) += scale * gauss(rng);
                  });
}

}  // namespace

SamplingTimeSchedule::SamplingTimeSchedule(std::vector<double> taus) : taus_(std::move(taus)) {
  if (taus_.empty()) throw DomainError("sampling schedule needs at least one time");
  for (std::size_t i = 0; i < taus_.size(); ++i) {
    if (!(taus_[i] > 0.0)) throw DomainError("sampling times must be positive");
    if (i > 0 && !(taus_[i] < taus_[i - 1]))
      throw DomainError("sampling times must be strictly decreasing");
  }
}

SamplingTimeSchedule SamplingTimeSchedule::prefix(std::size_t stages) const {
  if (stages < 1 || stages > taus_.size()) throw DomainError("schedule prefix out of range");
  return SamplingTimeSchedule({taus_.begin(), taus_.begin() + static_cast<long>(stages)});
}

bool SamplingTimeSchedule::aligned_to(const TrainingPartition& p, double tol) const {
  for (double t : taus_)
    if (!p.contains(t, tol)) return false;
  return true;
}

TrajectoryRecord multistep_sample(const ConsistencyFn& f_hat, const NoiseSchedule& schedule,
                                  const SamplingTimeSchedule& taus, Eigen::Index dim, std::size_t n,
                                  std::uint64_t seed) {
  if (n < 1) throw DomainError("multistep_sample: n must be at least 1");
  if (dim < 1) throw DomainError("multistep_sample: dimension must be at least 1");
  TrajectoryRecord rec;
  rec.taus = taus.taus();
  rec.seed = seed;
  const auto rows = static_cast<Eigen::Index>(n);
  for (std::size_t i = 0; i < taus.n_steps(); ++i) {
    const double tau = taus.taus()[i];
    Samples x = i == 0 ? Samples::Zero(rows, dim) : Samples(schedule.alpha(tau) * rec.denoised.back());
    add_noise(x, std::sqrt(schedule.sigma2(tau)), derive_seed(seed, kStageStream, i));
    rec.denoised.push_back(f_hat.eval_batch(x, tau));
    rec.noisy.push_back(std::move(x));
  }
  return rec;
}

SamplingTimeSchedule design_two_step_ou(double radius, double eps, double delta,
                                        const TrainingPartition& p) {
  if (!(radius > 0.0 && eps > 0.0 && delta > 0.0))
    throw DomainError("design_two_step_ou: R, eps and delta must be positive");
  if (eps / delta >= radius)
    throw DomainError("design_two_step_ou: requires eps/delta < R");
  const double tau1 = std::log(radius * radius * radius * delta * delta / (eps * eps));
  const double tau2 = std::log(radius * radius * delta / eps);
  const double r1 = p.round(tau1);
  const double r2 = p.round(tau2);
  if (r2 <= p.delta() / 2.0) throw DomainError("design_two_step_ou: tau_2 rounds to zero");
  if (!(r1 > r2)) throw DomainError("design_two_step_ou: times collide after rounding");
  return SamplingTimeSchedule({r1, r2});
}

SamplingTimeSchedule design_halving_ve(double horizon, const TrainingPartition& p) {
  const double delta = p.delta();
  if (!(horizon >= delta)) throw DomainError("design_halving_ve: requires T >= delta");
  const auto steps = static_cast<long>(std::floor(std::log2(2.0 * horizon / delta) + 1e-12));
  std::vector<double> taus;
  for (long i = 1; i <= steps; ++i) {
    const double r = i == steps ? delta : p.round(horizon * std::pow(2.0, 1.0 - static_cast<double>(i)));
    if (taus.empty() || r < taus.back()) taus.push_back(r);
  }
  return SamplingTimeSchedule(std::move(taus));
}

SamplingTimeSchedule design_uniform(double horizon, std::size_t n_steps, const TrainingPartition& p) {
  if (n_steps < 1) throw DomainError("design_uniform: N must be at least 1");
  const double n = static_cast<double>(n_steps);
  if (!(horizon >= n * p.delta() * (1.0 - 1e-12)))
    throw DomainError("design_uniform: requires T >= N delta");
  std::vector<double> taus;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double r = p.round(horizon * (n + 1.0 - static_cast<double>(i)) / n);
    if (!taus.empty() && !(r < taus.back()))
      throw DomainError("design_uniform: infeasible, times collide after rounding");
    taus.push_back(r);
  }
  if (taus.back() < p.delta()) throw DomainError("design_uniform: final time rounds below delta");
  return SamplingTimeSchedule(std::move(taus));
}

Samples smooth_output(const Samples& samples, double sigma_eps, std::uint64_t seed) {
  if (!(sigma_eps > 0.0)) throw DomainError("smooth_output: sigma_eps must be positive");
  Samples out = samples;
  add_noise(out, sigma_eps, derive_seed(seed, kSmoothStream, 0));
  return out;
}

double sigma_eps_optimal(double tau_last, double eps_over_delta, double dim, double log_smoothness) {
  if (!(tau_last > 0.0 && eps_over_delta > 0.0 && dim > 0.0 && log_smoothness > 0.0))
    throw DomainError("sigma_eps_optimal: inputs must be positive");
  return std::sqrt(tau_last * eps_over_delta / (4.0 * dim * log_smoothness));
}

}  // namespace cmlab
