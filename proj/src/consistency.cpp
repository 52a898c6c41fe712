// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmlab/parallel.hpp"

namespace cmlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_two_point(const TargetDistribution& target) {
  const auto& c = target.components();
  return target.kind() == TargetKind::Discrete && target.dim() == 1 && c.size() == 2 &&
         c[0].weight == c[1].weight;
}

std::pair<double, double> two_point_atoms(const TargetDistribution& target, const char* who) {
  if (!is_two_point(target))
    throw DomainError(std::string(who) + ": requires two equally weighted atoms in one dimension");
  const double a = target.components()[0].mean(0);
  const double b = target.components()[1].mean(0);
  return {std::min(a, b), std::max(a, b)};
}

const Component& single_gaussian(const TargetDistribution& target, const char* who) {
  if (target.kind() != TargetKind::GaussianMixture || target.components().size() != 1)
    throw DomainError(std::string(who) + ": requires a single Gaussian target");
  return target.components().front();
}

ConsistencyFn threshold_fn(ConsistencyKind kind, double lo, double hi,
                           std::function<double(double)> threshold) {
  auto map = [lo, hi, threshold](const Samples& x, double t) {
    const double a = threshold(t);
    Samples out(x.rows(), 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, 0) = x(i, 0) < a ? lo : hi;
    return out;
  };
  return ConsistencyFn(kind, map, std::max(std::abs(lo), std::abs(hi)),
                       ThresholdRule{lo, hi, std::move(threshold)});
}

// Coefficients of the PF-ODE velocity at the RK4 nodes s_0, s_0 + dt/2, ...
struct FlowGrid {
  double dt = 0.0;
  long steps = 0;
  std::vector<double> alpha, sigma2, h, g2;  // size 2 * steps + 1
};

FlowGrid make_grid(const NoiseSchedule& schedule, double from, double to, double step) {
  FlowGrid g;
  const double span = std::abs(to - from);
  if (span / step > 1e8) throw DomainError("pf-ode: step count exceeds 1e8");
  g.steps = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-9)));
  g.dt = (to - from) / static_cast<double>(g.steps);
  const long nodes = 2 * g.steps + 1;
  g.alpha.resize(nodes);
  g.sigma2.resize(nodes);
  g.h.resize(nodes);
  g.g2.resize(nodes);
  for (long j = 0; j < nodes; ++j) {
    const double s = j == nodes - 1 ? to : from + 0.5 * g.dt * static_cast<double>(j);
    g.alpha[j] = schedule.alpha(s);
    g.sigma2[j] = schedule.sigma2(s);
    const auto dd = drift_diffusion(schedule, s);
    g.h[j] = dd.h;
    g.g2[j] = dd.g2;
  }
  return g;
}

// Velocity at grid node j for one point. `scratch` holds per-component terms.
void velocity(const TargetDistribution& target, const FlowGrid& g, long j,
              const Eigen::Ref<const Vector>& x, std::vector<double>& scratch,
              Eigen::Ref<Vector> out) {
  const auto& comps = target.components();
  const double a = g.alpha[j];
  const double s2 = g.sigma2[j];
  const double d = static_cast<double>(x.size());
  double best = -kInf;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double var = a * a * comps[k].variance + s2;
    const double r2 = (x - a * comps[k].mean).squaredNorm();
    scratch[k] = std::log(comps[k].weight) - 0.5 * d * std::log(2.0 * kPi * var) - r2 / (2.0 * var);
    best = std::max(best, scratch[k]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) total += (scratch[k] = std::exp(scratch[k] - best));
  if (!std::isfinite(best)) throw UnderflowError("pf-ode: score undefined along the trajectory");
  out = g.h[j] * x;
  const double half_g2 = 0.5 * g.g2[j];
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double var = a * a * comps[k].variance + s2;
    out -= half_g2 * (scratch[k] / total) * (a * comps[k].mean - x) / var;
  }
}

}  // namespace

ConsistencyFn::ConsistencyFn(ConsistencyKind kind, BatchMap map, double output_radius,
                             std::optional<ThresholdRule> rule, std::optional<AffineRule> affine)
    : kind_(kind),
      map_(std::move(map)),
      radius_(output_radius),
      rule_(std::move(rule)),
      affine_(std::move(affine)) {
  if (!map_) throw DomainError("consistency function needs a map");
  if (!(output_radius > 0.0)) throw DomainError("output radius must be positive");
}

ConsistencyFn ConsistencyFn::wrap(BatchMap map, double output_radius) {
  return ConsistencyFn(ConsistencyKind::Wrapped, std::move(map), output_radius);
}

Vector ConsistencyFn::eval(const Vector& x, double t) const {
  return eval_batch(x.transpose(), t).row(0).transpose();
}

Samples ConsistencyFn::eval_batch(const Samples& x, double t) const {
  if (t == 0.0) return x;
  if (!(t > 0.0)) throw DomainError("consistency function evaluated at negative time");
  Samples out(x.rows(), x.cols());
  parallel_chunks(static_cast<std::size_t>(x.rows()),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    const auto b = static_cast<Eigen::Index>(begin);
                    const auto len = static_cast<Eigen::Index>(end - begin);
                    Samples block = map_(x.middleRows(b, len), t);
                    if (block.rows() != len || block.cols() != x.cols())
                      throw DomainError("consistency map returned a block of the wrong shape");
                    out.middleRows(b, len) = block;
                  });
  if (std::isfinite(radius_)) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double r = out.row(i).norm();
      if (r > radius_) out.row(i) *= radius_ / r;
    }
  }
  return out;
}

PfOdeFlow::PfOdeFlow(TargetDistribution target, NoiseSchedule schedule, PfOdeSolverConfig cfg)
    : target_(std::move(target)), schedule_(std::move(schedule)), cfg_(cfg) {
  if (!(cfg_.step > 0.0)) throw DomainError("pf-ode step must be positive");
  if (!(cfg_.min_time_floor > 0.0)) throw DomainError("pf-ode time floor must be positive");
}

Samples PfOdeFlow::transport(const Samples& x, double from, double to) const {
  from = std::max(from, cfg_.min_time_floor);
  to = std::max(to, cfg_.min_time_floor);
  if (from == to) return x;
  const FlowGrid g = make_grid(schedule_, from, to, cfg_.step);
  const Eigen::Index d = x.cols();
  Samples out(x.rows(), d);
  parallel_chunks(static_cast<std::size_t>(x.rows()),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    std::vector<double> scratch(target_.components().size());
                    Vector y(d), k1(d), k2(d), k3(d), k4(d), tmp(d);
                    for (std::size_t i = begin; i < end; ++i) {
                      y = x.row(static_cast<Eigen::Index>(i)).transpose();
                      for (long s = 0; s < g.steps; ++s) {
                        const long j = 2 * s;
                        velocity(target_, g, j, y, scratch, k1);
                        tmp = y + 0.5 * g.dt * k1;
                        velocity(target_, g, j + 1, tmp, scratch, k2);
                        tmp = y + 0.5 * g.dt * k2;
                        velocity(target_, g, j + 1, tmp, scratch, k3);
                        tmp = y + g.dt * k3;
                        velocity(target_, g, j + 2, tmp, scratch, k4);
                        y += (g.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                      }
                      out.row(static_cast<Eigen::Index>(i)) = y.transpose();
                    }
                  });
  return out;
}

ConsistencyFn exact_two_point(const TargetDistribution& target, const NoiseSchedule& schedule) {
  const auto [lo, hi] = two_point_atoms(target, "exact_two_point");
  const double mid = 0.5 * (lo + hi);
  return threshold_fn(ConsistencyKind::ExactTwoPoint, lo, hi,
                      [schedule, mid](double t) { return mid * schedule.alpha(t); });
}

ConsistencyFn pf_ode_consistency(const TargetDistribution& target, const NoiseSchedule& schedule,
                                 PfOdeSolverConfig cfg) {
  const bool discrete = target.kind() == TargetKind::Discrete;
  const bool snap = cfg.snap_to_atoms.value_or(discrete) && discrete;
  const double radius = discrete ? geometry(target).radius : kInf;
  auto flow = std::make_shared<PfOdeFlow>(target, schedule, cfg);
  auto map = [flow, snap](const Samples& x, double t) {
    Samples y = flow->transport(x, t, flow->config().min_time_floor);
    if (snap) {
      const auto& comps = flow->target().components();
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        std::size_t best = 0;
        double best_d = kInf;
        for (std::size_t k = 0; k < comps.size(); ++k) {
          const double dk = (y.row(i).transpose() - comps[k].mean).squaredNorm();
          if (dk < best_d) best_d = dk, best = k;
        }
        y.row(i) = comps[best].mean.transpose();
      }
    }
    return y;
  };
  // Radius 0 would reject a single atom at the origin; any positive value is exact there.
  return ConsistencyFn(ConsistencyKind::PfOde, map, radius > 0.0 ? radius : 1.0);
}

ConsistencyFn quantile_perturbed(const TargetDistribution& target, const NoiseSchedule& schedule,
                                 double kappa) {
  const auto [lo, hi] = two_point_atoms(target, "quantile_perturbed");
  if (!(kappa > 0.0)) throw DomainError("quantile_perturbed: kappa must be positive");
  auto threshold = [target, schedule, kappa](double t) {
    const double level = 0.5 + kappa * t * t;
    if (level >= 1.0)
      throw DomainError("quantile_perturbed: 0.5 + kappa t^2 >= 1 at t = " + std::to_string(t));
    return MarginalView(target, schedule, t).quantile(level);
  };
  return threshold_fn(ConsistencyKind::QuantilePerturbed, lo, hi, threshold);
}

ConsistencyFn exact_gaussian(const TargetDistribution& target, const NoiseSchedule& schedule) {
  return gain_perturbed(target, schedule, 0.0);
}

ConsistencyFn gain_perturbed(const TargetDistribution& target, const NoiseSchedule& schedule,
                             double eta) {
  const Component c = single_gaussian(target, eta == 0.0 ? "exact_gaussian" : "gain_perturbed");
  const Vector mu = c.mean;
  const double sd0 = std::sqrt(c.variance);
  auto gain = [schedule, sd0, eta](double t) {
    const double a = schedule.alpha(t);
    return (1.0 + eta * t) * sd0 / std::sqrt(a * a * sd0 * sd0 + schedule.sigma2(t));
  };
  auto shift = [schedule, mu, gain](double t) -> Vector {
    return mu - gain(t) * schedule.alpha(t) * mu;
  };
  auto map = [gain, shift](const Samples& x, double t) {
    const double g = gain(t);
    const Vector b = shift(t);
    Samples out = g * x;
    out.rowwise() += b.transpose();
    return out;
  };
  return ConsistencyFn(eta == 0.0 ? ConsistencyKind::ExactGaussian : ConsistencyKind::GainPerturbed,
                       map, kInf, std::nullopt, AffineRule{gain, shift});
}

MonteCarloEstimate summarize(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const auto n = values.size();
  if (n == 0) return {};
  const double mean = values.mean();
  if (n == 1) return {mean, 0.0};
  const double var = (values.array() - mean).square().sum() / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

MonteCarloEstimate consistency_loss(const ConsistencyFn& f_hat, const PfOdeFlow& flow,
                                    const TrainingPartition& partition, long i, std::size_t n,
                                    std::uint64_t seed) {
  if (i < 0 || i >= partition.m()) throw DomainError("consistency_loss: step index out of range");
  const double t0 = partition.point(i);
  const double t1 = partition.point(i + 1);
  const Samples x = MarginalView(flow.target(), flow.schedule(), t0).sample(n, seed);
  const Samples moved = flow.transport(x, t0, t1);
  const Samples a = f_hat.eval_batch(x, t0);
  const Samples b = f_hat.eval_batch(moved, t1);
  return summarize((a - b).rowwise().squaredNorm());
}

MonteCarloEstimate evaluation_error(const ConsistencyFn& f_hat, const ConsistencyFn& f,
                                    const MarginalView& view, std::size_t n, std::uint64_t seed) {
  const Samples x = view.sample(n, seed);
  const Samples a = f_hat.eval_batch(x, view.t());
  const Samples b = f.eval_batch(x, view.t());
  return summarize((a - b).rowwise().squaredNorm());
}

}  // namespace cmlab
