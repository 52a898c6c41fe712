// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/target_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cmlab/parallel.hpp"

namespace cmlab {
namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogDensityFloor = std::log(kDensityFloor);
constexpr std::uint64_t kMarginalStream = 0x6d617267ULL;

void check_weights(const std::vector<Component>& comps) {
  if (comps.empty()) throw DomainError("target needs at least one component");
  double total = 0.0;
  for (const auto& c : comps) {
    if (!(c.weight > 0.0)) throw DomainError("component weights must be strictly positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("component weights must sum to 1");
  const auto d = comps.front().mean.size();
  if (d < 1) throw DomainError("target dimension must be at least 1");
  for (const auto& c : comps)
    if (c.mean.size() != d) throw DomainError("component dimensions differ");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TargetDistribution::TargetDistribution(TargetKind kind, std::vector<Component> components,
                                       std::optional<double> log_smoothness)
    : kind_(kind),
      dim_(components.front().mean.size()),
      components_(std::move(components)),
      log_smoothness_(log_smoothness) {}

TargetDistribution TargetDistribution::discrete(std::vector<std::pair<Vector, double>> atoms) {
  std::vector<Component> comps;
  comps.reserve(atoms.size());
  for (auto& [loc, w] : atoms) comps.push_back({std::move(loc), 0.0, w});
  check_weights(comps);
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j)
      if (comps[i].mean == comps[j].mean) throw DomainError("atom locations must be distinct");
  return TargetDistribution(TargetKind::Discrete, std::move(comps), std::nullopt);
}

TargetDistribution TargetDistribution::gaussian_mixture(std::vector<Component> components,
                                                        std::optional<double> log_smoothness) {
  check_weights(components);
  for (const auto& c : components)
    if (!(c.variance > 0.0)) throw DomainError("mixture variances must be positive");
  if (log_smoothness && !(*log_smoothness > 0.0))
    throw DomainError("log-smoothness L must be positive");
  if (!log_smoothness && components.size() == 1) log_smoothness = 1.0 / components[0].variance;
  return TargetDistribution(TargetKind::GaussianMixture, std::move(components), log_smoothness);
}

TargetDistribution TargetDistribution::two_point(double lo, double hi) {
  return discrete({{Vector::Constant(1, lo), 0.5}, {Vector::Constant(1, hi), 0.5}});
}

Geometry geometry(const TargetDistribution& target) {
  Geometry g;
  const auto& comps = target.components();
  const double d = static_cast<double>(target.dim());
  for (const auto& c : comps) {
    const double spread = 3.0 * std::sqrt(c.variance);
    g.radius = std::max(g.radius, c.mean.norm() + spread);
    g.second_moment += c.weight * (c.mean.squaredNorm() + d * c.variance);
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double si = 3.0 * std::sqrt(comps[i].variance);
    g.diameter = std::max(g.diameter, 2.0 * si);
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const double sj = 3.0 * std::sqrt(comps[j].variance);
      g.diameter = std::max(g.diameter, (comps[i].mean - comps[j].mean).norm() + si + sj);
    }
  }
  g.log_smoothness = target.log_smoothness();
  g.effective = target.kind() == TargetKind::GaussianMixture;
  return g;
}

double require_log_smoothness(const Geometry& g) {
  if (!g.log_smoothness)
    throw MissingInputError("L", "log-smoothness L is required for the TV bound but was not configured");
  return *g.log_smoothness;
}

MarginalView::MarginalView(std::vector<Component> mixture, double t)
    : mixture_(std::move(mixture)), t_(t), dim_(mixture_.front().mean.size()) {
  degenerate_ = std::any_of(mixture_.begin(), mixture_.end(),
                            [](const Component& c) { return c.variance <= 0.0; });
}

MarginalView::MarginalView(const TargetDistribution& target, const NoiseSchedule& schedule,
                           double t)
    : t_(t), dim_(target.dim()) {
  if (!(t >= 0.0)) throw DomainError("marginal time must be nonnegative");
  const double a = schedule.alpha(t);
  const double s2 = schedule.sigma2(t);
  mixture_.reserve(target.components().size());
  for (const auto& c : target.components())
    mixture_.push_back({a * c.mean, a * a * c.variance + s2, c.weight});
  degenerate_ = std::any_of(mixture_.begin(), mixture_.end(),
                            [](const Component& c) { return c.variance <= 0.0; });
}

MarginalView MarginalView::from_mixture(std::vector<Component> mixture) {
  check_weights(mixture);
  for (const auto& c : mixture)
    if (c.variance < 0.0) throw DomainError("mixture variances must be nonnegative");
  return MarginalView(std::move(mixture), 0.0);
}

void MarginalView::require_density() const {
  if (degenerate_) throw DomainError("marginal has atoms (t = 0 on a discrete target); no density");
}

void MarginalView::require_1d() const {
  if (dim_ != 1) throw DomainError("operation requires a one-dimensional target");
}

double MarginalView::log_pdf(const Vector& x) const {
  require_density();
  const double d = static_cast<double>(dim_);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(mixture_.size());
  for (std::size_t k = 0; k < mixture_.size(); ++k) {
    const auto& c = mixture_[k];
    terms[k] = std::log(c.weight) - 0.5 * d * std::log(2.0 * kPi * c.variance) -
               (x - c.mean).squaredNorm() / (2.0 * c.variance);
    best = std::max(best, terms[k]);
  }
  double acc = 0.0;
  for (double v : terms) acc += std::exp(v - best);
  return best + std::log(acc);
}

double MarginalView::pdf(const Vector& x) const { return std::exp(log_pdf(x)); }

Vector MarginalView::score(const Vector& x) const {
  require_density();
  const double d = static_cast<double>(dim_);
  std::vector<double> terms(mixture_.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mixture_.size(); ++k) {
    const auto& c = mixture_[k];
    terms[k] = std::log(c.weight) - 0.5 * d * std::log(2.0 * kPi * c.variance) -
               (x - c.mean).squaredNorm() / (2.0 * c.variance);
    best = std::max(best, terms[k]);
  }
  double total = 0.0;
  for (double& v : terms) total += (v = std::exp(v - best));
  if (best + std::log(total) < kLogDensityFloor)
    throw UnderflowError("score: density below 1e-300; clamp x or raise t");
  Vector s = Vector::Zero(dim_);
  for (std::size_t k = 0; k < mixture_.size(); ++k)
    s += (terms[k] / total) * (mixture_[k].mean - x) / mixture_[k].variance;
  return s;
}

double MarginalView::pdf(double x) const {
  require_1d();
  return pdf(Vector::Constant(1, x));
}

double MarginalView::score(double x) const {
  require_1d();
  return score(Vector::Constant(1, x))(0);
}

double MarginalView::cdf(double x) const {
  require_1d();
  double acc = 0.0;
  for (const auto& c : mixture_) {
    const double m = c.mean(0);
    if (c.variance <= 0.0)
      acc += x >= m ? c.weight : 0.0;
    else
      acc += c.weight * normal_cdf((x - m) / std::sqrt(c.variance));
  }
  return std::clamp(acc, 0.0, 1.0);
}

double MarginalView::mean_1d() const {
  require_1d();
  double m = 0.0;
  for (const auto& c : mixture_) m += c.weight * c.mean(0);
  return m;
}

double MarginalView::variance_1d() const {
  const double m = mean_1d();
  double v = 0.0;
  for (const auto& c : mixture_) v += c.weight * (c.variance + (c.mean(0) - m) * (c.mean(0) - m));
  return v;
}

namespace {

// log Phi(z), usable far into the lower tail.
double log_ndtr(double z) {
  if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * kPi) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Sign of F(x) - u. Tail masses are kept in log space so the sign stays
// right where F is flat between well-separated components.
int compare_cdf(const std::vector<Component>& mixture, double x, double u) {
  double whole = 0.0;
  double log_below = -kInf;  // mass below x from components centred above it
  double log_above = -kInf;  // mass above x from components centred at or below it
  for (const auto& c : mixture) {
    const double m = c.mean(0);
    if (c.variance <= 0.0) {
      if (x >= m) whole += c.weight;
      continue;
    }
    const double z = (x - m) / std::sqrt(c.variance);
    if (z >= 0.0) {
      whole += c.weight;
      log_above = log_add(log_above, std::log(c.weight) + log_ndtr(-z));
    } else {
      log_below = log_add(log_below, std::log(c.weight) + log_ndtr(z));
    }
  }
  const double d = whole - u;
  const double v = d + std::exp(log_below) - std::exp(log_above);
  if (v != 0.0) return v < 0.0 ? -1 : 1;
  if (d == 0.0 && log_below != log_above) return log_below < log_above ? -1 : 1;
  return 0;
}

}  // namespace

double MarginalView::quantile(double u) const {
  require_1d();
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  const double center = mean_1d();
  double width = 10.0 * std::sqrt(variance_1d());
  if (!(width > 0.0)) width = 1.0;
  double lo = center - width;
  double hi = center + width;
  int expansions = 0;
  while (compare_cdf(mixture_, lo, u) > 0) {
    width *= 2.0;
    lo = center - width;
    if (++expansions > 200) throw ConvergenceError("quantile: could not bracket lower tail");
  }
  while (compare_cdf(mixture_, hi, u) < 0) {
    width *= 2.0;
    hi = center + width;
    if (++expansions > 200) throw ConvergenceError("quantile: could not bracket upper tail");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid))) return mid;
    if (compare_cdf(mixture_, mid, u) < 0)
      lo = mid;
    else
      hi = mid;
  }
  throw ConvergenceError("quantile: bisection did not converge in 200 iterations");
}

Samples MarginalView::sample(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw DomainError("sample count must be at least 1");
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : mixture_) cumulative.push_back(acc += c.weight);
  cumulative.back() = 1.0;

  Samples out(static_cast<Eigen::Index>(n), dim_);
  parallel_chunks(n, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::mt19937_64 rng(derive_seed(seed, kMarginalStream, chunk));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = begin; i < end; ++i) {
      const double u = unif(rng);
      const auto k = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      const auto& c = mixture_[std::min(k, mixture_.size() - 1)];
      const double sd = std::sqrt(c.variance);
      for (Eigen::Index j = 0; j < dim_; ++j)
        out(static_cast<Eigen::Index>(i), j) = c.mean(j) + sd * gauss(rng);
    }
  });
  return out;
}

}  // namespace cmlab
