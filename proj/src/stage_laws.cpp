// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/stage_laws.hpp"

#include <algorithm>

namespace cmlab {
namespace {

MarginalView push_forward(const ConsistencyFn& f, const MarginalView& law, double t) {
  if (const auto& rule = f.threshold_rule()) {
    const double p_lo = law.cdf(rule->threshold(t));
    std::vector<Component> out;
    if (p_lo > 0.0) out.push_back({Vector::Constant(1, rule->lo), 0.0, p_lo});
    if (p_lo < 1.0) out.push_back({Vector::Constant(1, rule->hi), 0.0, 1.0 - p_lo});
    return MarginalView::from_mixture(std::move(out));
  }
  if (const auto& affine = f.affine_rule()) {
    const double g = affine->gain(t);
    const Vector b = affine->shift(t);
    std::vector<Component> out;
    for (const auto& c : law.components()) out.push_back({g * c.mean + b, g * g * c.variance, c.weight});
    return MarginalView::from_mixture(std::move(out));
  }
  throw DomainError("analytic stage laws need a threshold-form or affine estimator");
}

}  // namespace

MarginalView diffuse(const MarginalView& law, double alpha, double sigma2) {
  std::vector<Component> out;
  for (const auto& c : law.components())
    out.push_back({alpha * c.mean, alpha * alpha * c.variance + sigma2, c.weight});
  return MarginalView::from_mixture(std::move(out));
}

std::vector<StageLaw> analytic_stage_laws(const ConsistencyFn& f_hat, const NoiseSchedule& schedule,
                                          const SamplingTimeSchedule& taus, Eigen::Index dim) {
  if (f_hat.threshold_rule() && dim != 1) throw DomainError("threshold estimators are one-dimensional");
  std::vector<StageLaw> laws;
  for (std::size_t i = 0; i < taus.n_steps(); ++i) {
    const double tau = taus.taus()[i];
    MarginalView noisy =
        i == 0 ? MarginalView::from_mixture({{Vector::Zero(dim), schedule.sigma2(tau), 1.0}})
               : diffuse(laws.back().output, schedule.alpha(tau), schedule.sigma2(tau));
    MarginalView output = push_forward(f_hat, noisy, tau);
    laws.push_back({tau, std::move(noisy), std::move(output)});
  }
  return laws;
}

}  // namespace cmlab
