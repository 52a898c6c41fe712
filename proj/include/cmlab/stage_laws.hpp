// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "cmlab/consistency.hpp"
#include "cmlab/sampler.hpp"
#include "cmlab/target_dist.hpp"

namespace cmlab {

/// Exact laws of one multistep stage: x_hat_{tau_i} and f_hat(x_hat_{tau_i}, tau_i).
struct StageLaw {
  double tau;
  MarginalView noisy;
  MarginalView output;
};

/// Closed-form stage laws of multistep sampling for estimators with a
/// threshold rule (outputs are two atoms) or an affine rule (Gaussian
/// components stay Gaussian). Throws DomainError for other estimators.
std::vector<StageLaw> analytic_stage_laws(const ConsistencyFn& f_hat, const NoiseSchedule& schedule,
                                          const SamplingTimeSchedule& taus, Eigen::Index dim);

/// Law of x' = alpha x + sigma z for x drawn from `law`.
MarginalView diffuse(const MarginalView& law, double alpha, double sigma2);

}  // namespace cmlab
