// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmlab/bounds.hpp"
#include "cmlab/consistency.hpp"
#include "cmlab/noise_schedule.hpp"
#include "cmlab/sampler.hpp"
#include "cmlab/target_dist.hpp"

namespace cmlab {

struct EstimatorSpec {
  std::string name = "exact";  // exact | pfode | quantile_perturbed | gain_perturbed
  double kappa = 1e-4;
  double ode_step = 1e-3;
  double eta = 0.0;
};

struct DesignSpec {
  std::string kind = "two_step_ou";  // two_step_ou | halving_ve | uniform | explicit
  std::string label;
  std::vector<double> taus;           // explicit
  std::optional<double> horizon;      // halving_ve, uniform
  std::size_t n_steps = 5;            // uniform
};

struct ExperimentConfig {
  nlohmann::json target_json;
  TargetDistribution target = TargetDistribution::two_point(0.0, 100.0);
  std::string schedule_spec = "ou";
  NoiseSchedule schedule = NoiseSchedule::ou();
  EstimatorSpec estimator;
  std::vector<DesignSpec> designs;
  double delta = 0.01;
  std::optional<long> partition_steps;
  std::optional<double> eps_over_delta;  // unset means "measured"
  std::optional<double> radius;          // overrides the target radius R
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  bool tv = false;
  std::optional<double> smoothing_sigma;  // unset with smoothing_optimal means optimal
  bool smoothing_optimal = false;
  std::optional<TailConstants> tail;
  bool tv_bound_requested = false;  // bounds command
  std::string output;
};

/// Validates a JSON config; errors are ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

TargetDistribution parse_target(const nlohmann::json& j);

struct ResultRow {
  std::string schedule_label;
  std::size_t stage = 0;
  double tau = 0.0;
  double w2 = 0.0;
  double w2_stderr = 0.0;
  double bound_general = 0.0;
  double bound_modified = 0.0;
  double kl_bound = 0.0;
  std::optional<double> tv;
  std::optional<double> tv_bound;
};

/// Header schedule_label,stage,tau,w2,bound_general,bound_modified,kl_bound
/// with ",tv,tv_bound" appended when any row carries TV. Non-finite cells throw.
std::string to_csv(const std::vector<ResultRow>& rows);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::string summary;
};

ConsistencyFn make_estimator(const ExperimentConfig& cfg);
TrainingPartition make_partition(const ExperimentConfig& cfg);
SamplingTimeSchedule make_design(const ExperimentConfig& cfg, const DesignSpec& d,
                                 const TrainingPartition& p);

/// Largest sqrt(E|f_hat - f|^2) / tau over the given times, against the
/// exact consistency function of the target.
double measured_eps_over_delta(const ConsistencyFn& f_hat, const ExperimentConfig& cfg,
                               const std::vector<double>& taus, std::size_t n, std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct ReproduceOptions {
  std::size_t n = 1000000;
  std::uint64_t seed = 1;
  double delta = 0.01;
  double kappa = 1e-4;
  std::size_t uniform_steps = 5;
};

/// Two-point {0, 100} target under OU: the two-step design against the
/// uniform and halving baselines, all started at the two-step tau_1.
ExperimentConfig reproduce_config(const ReproduceOptions& opt);

/// Bound terms per design and stage; no sampling.
std::string bounds_table(const ExperimentConfig& cfg);

}  // namespace cmlab
