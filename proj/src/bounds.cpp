// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/bounds.hpp"

#include <cmath>

namespace cmlab {
namespace {

double require(const std::optional<double>& v, const char* field) {
  if (!v) throw MissingInputError(field, std::string("bound input '") + field + "' is required");
  return *v;
}

// sum_{j=2}^{stages} alpha_j^2 tau_{j-1}^2 (eps/delta)^2 / (denom sigma_j^2)
double accumulated(const BoundInputs& in, std::size_t stages, double denom) {
  const auto& t = in.taus.taus();
  const double r2 = in.eps_over_delta * in.eps_over_delta;
  double acc = 0.0;
  for (std::size_t j = 1; j < stages; ++j) {
    const double a = in.schedule.alpha(t[j]);
    acc += a * a * t[j - 1] * t[j - 1] * r2 / (denom * in.schedule.sigma2(t[j]));
  }
  return acc;
}

double first_ratio(const BoundInputs& in) {
  const double a = in.schedule.alpha(in.taus.first());
  return a * a / in.schedule.sigma2(in.taus.first());
}

}  // namespace

BoundInputs& BoundInputs::with_geometry(const Geometry& g) {
  radius = g.radius;
  diameter = g.diameter;
  second_moment = g.second_moment;
  if (g.log_smoothness) log_smoothness = g.log_smoothness;
  return *this;
}

W2Bound w2_bound_general(const BoundInputs& in) {
  const double r = require(in.radius, "R");
  W2Bound b;
  b.term_i = first_ratio(in) * r * r / 4.0;
  b.term_ii = accumulated(in, in.taus.n_steps(), 4.0);
  b.term_iii = in.taus.last() * in.eps_over_delta;
  b.total = 2.0 * r * std::pow(b.term_i + b.term_ii, 0.25) + b.term_iii;
  return b;
}

W2Bound w2_bound_modified(const BoundInputs& in) {
  const double diameter = require(in.diameter, "diameter");
  const double m2 = require(in.second_moment, "second_moment");
  W2Bound b;
  b.term_i = first_ratio(in) * m2 / 2.0;
  b.term_ii = accumulated(in, in.taus.n_steps(), 4.0);
  b.term_iii = in.taus.last() * in.eps_over_delta;
  b.total = diameter * std::pow(b.term_i + b.term_ii, 0.25) + b.term_iii;
  return b;
}

TvBound tv_bound(const BoundInputs& in) {
  const double L = require(in.log_smoothness, "L");
  const double sigma = require(in.sigma_eps, "sigma_eps");
  const double m2 = require(in.second_moment, "second_moment");
  if (!(sigma > 0.0)) throw DomainError("tv_bound: sigma_eps must be positive");
  TvBound b;
  b.kl_term = std::sqrt(first_ratio(in) * m2 / 4.0 + accumulated(in, in.taus.n_steps(), 4.0));
  b.cm_term = in.taus.last() * in.eps_over_delta / (2.0 * sigma);
  b.smoothing_term = 2.0 * in.dim * L * sigma;
  b.total = b.kl_term + b.cm_term + b.smoothing_term;
  return b;
}

TailBound w2_bound_tail(const BoundInputs& in) {
  if (!in.tail) throw MissingInputError("tail", "tail constants (c, C) are required");
  const double r = require(in.radius, "R");
  if (r < in.tail->C) throw DomainError("w2_bound_tail: requires R >= C");
  TailBound b;
  b.base = w2_bound_general(in);
  b.tail_term = in.tail->coeff * r * std::exp(-r / (2.0 * in.tail->C));
  b.total = b.base.total + b.tail_term;
  return b;
}

double kl_bound(const BoundInputs& in, std::size_t stage) {
  if (stage < 1 || stage > in.taus.n_steps()) throw DomainError("kl_bound: stage out of range");
  const double m2 = require(in.second_moment, "second_moment");
  return first_ratio(in) * m2 / 2.0 + accumulated(in, stage, 2.0);
}

double sde_contraction_bound(const NoiseSchedule& schedule, double t, double w2_sq) {
  return 0.5 * contraction(schedule, t) * w2_sq;
}

}  // namespace cmlab
