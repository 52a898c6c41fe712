// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/noise_schedule.hpp"

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "cmlab/core.hpp"

namespace cmlab {

NoiseSchedule NoiseSchedule::ou() {
  return NoiseSchedule(
      ScheduleKind::OU, [](double t) { return std::exp(-t); },
      [](double t) { return -std::expm1(-2.0 * t); },
      std::numeric_limits<double>::infinity());
}

NoiseSchedule NoiseSchedule::ve() {
  return NoiseSchedule(
      ScheduleKind::VE, [](double) { return 1.0; }, [](double t) { return t * t; },
      std::numeric_limits<double>::infinity());
}

NoiseSchedule NoiseSchedule::custom(Curve alpha, Curve sigma2, double t_max) {
  if (!alpha || !sigma2) throw DomainError("custom schedule needs alpha and sigma2 curves");
  if (!(t_max > 0.0)) throw DomainError("custom schedule needs t_max > 0");
  if (std::abs(alpha(0.0) - 1.0) > 1e-12 || std::abs(sigma2(0.0)) > 1e-12)
    throw DomainError("custom schedule must start at alpha(0) = 1, sigma2(0) = 0");
  return NoiseSchedule(ScheduleKind::Custom, std::move(alpha), std::move(sigma2), t_max);
}

NoiseSchedule NoiseSchedule::tabulated(std::vector<double> t, std::vector<double> alpha,
                                       std::vector<double> sigma2) {
  const std::size_t n = t.size();
  if (n < 4 || alpha.size() != n || sigma2.size() != n)
    throw DomainError("tabulated schedule needs at least 4 rows of (t, alpha, sigma2)");
  if (t[0] != 0.0) throw DomainError("tabulated schedule must start at t = 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("tabulated t must be strictly increasing");
    if (!(alpha[i] > 0.0)) throw DomainError("tabulated alpha must be positive");
    if (i > 0 && sigma2[i] < sigma2[i - 1])
      throw DomainError("tabulated sigma2 must be nondecreasing");
  }
  const double t_max = t.back();
  // pchip takes ownership of its abscissas, so each curve gets its own copy.
  auto t2 = t;
  boost::math::interpolators::pchip<std::vector<double>> a(std::move(t), std::move(alpha));
  boost::math::interpolators::pchip<std::vector<double>> s(std::move(t2), std::move(sigma2));
  return custom([a](double x) { return a(x); }, [s](double x) { return s(x); }, t_max);
}

NoiseSchedule NoiseSchedule::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("schedule", "cannot open schedule table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("schedule", "empty schedule table");
  std::vector<double> t, alpha, sigma2;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[3];
    int k = 0;
    for (; k < 3 && std::getline(ss, cell, ','); ++k) {
      try {
        v[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError("schedule", "row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    if (k != 3) throw ConfigError("schedule", "row " + std::to_string(row) + ": expected t,alpha,sigma2");
    t.push_back(v[0]);
    alpha.push_back(v[1]);
    sigma2.push_back(v[2]);
  }
  try {
    return tabulated(std::move(t), std::move(alpha), std::move(sigma2));
  } catch (const DomainError& e) {
    throw ConfigError("schedule", e.what());
  }
}

NoiseSchedule NoiseSchedule::parse(const std::string& spec) {
  if (spec == "ou") return ou();
  if (spec == "ve") return ve();
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv") return from_csv(spec);
  throw ConfigError("schedule", "expected \"ou\", \"ve\" or a .csv path, got \"" + spec + "\"");
}

namespace {

void check_domain(double t, double t_max) {
  if (!(t >= 0.0) || t > t_max)
    throw DomainError("schedule evaluated at t = " + std::to_string(t) + ", outside [0, t_max]");
}

}  // namespace

double NoiseSchedule::alpha(double t) const {
  check_domain(t, t_max_);
  switch (kind_) {
    case ScheduleKind::OU: return std::exp(-t);
    case ScheduleKind::VE: return 1.0;
    default: return alpha_(t);
  }
}

double NoiseSchedule::sigma2(double t) const {
  check_domain(t, t_max_);
  switch (kind_) {
    case ScheduleKind::OU: return -std::expm1(-2.0 * t);
    case ScheduleKind::VE: return t * t;
    default: return sigma2_(t);
  }
}

namespace {

// Derivative of f at t inside [0, t_max]; one-sided second-order stencils at
// the ends.
template <class F>
double derivative(const F& f, double t, double t_max) {
  double step = std::min(1e-6, t / 2.0);
  if (step <= 0.0) {
    step = 1e-6;
    return (-3.0 * f(t) + 4.0 * f(t + step) - f(t + 2.0 * step)) / (2.0 * step);
  }
  if (t + step > t_max) {
    step = 1e-6;
    return (3.0 * f(t) - 4.0 * f(t - step) + f(t - 2.0 * step)) / (2.0 * step);
  }
  return (f(t + step) - f(t - step)) / (2.0 * step);
}

}  // namespace

DriftDiffusion drift_diffusion(const NoiseSchedule& s, double t) {
  if (!(t >= 0.0) || t > s.t_max())
    throw DomainError("drift_diffusion: t = " + std::to_string(t) + " outside schedule domain");
  switch (s.kind()) {
    case ScheduleKind::OU: return {-1.0, 2.0};
    case ScheduleKind::VE: return {0.0, 2.0 * t};
    default: break;
  }
  const double a = s.alpha(t);
  const double da = derivative([&](double x) { return s.alpha(x); }, t, s.t_max());
  const double ds2 = derivative([&](double x) { return s.sigma2(x); }, t, s.t_max());
  const double h = da / a;
  return {h, ds2 - 2.0 * h * s.sigma2(t)};
}

DriftDiffusion drift_diffusion(const NoiseSchedule& s, const TrainingPartition& p, double t) {
  if (t > p.horizon() * (1.0 + 1e-12))
    throw DomainError("drift_diffusion: t beyond partition horizon");
  return drift_diffusion(s, t);
}

double contraction(const NoiseSchedule& s, double t) {
  if (!(t > 0.0)) throw DomainError("contraction: requires t > 0");
  const double a = s.alpha(t);
  return a * a / s.sigma2(t);
}

TrainingPartition::TrainingPartition(double delta, long m) : delta_(delta), m_(m) {
  if (!(delta > 0.0)) throw DomainError("partition step must be positive");
  if (m < 1) throw DomainError("partition needs at least one step");
}

double TrainingPartition::point(long i) const {
  if (i < 0 || i > m_) throw DomainError("partition index out of range");
  return static_cast<double>(i) * delta_;
}

long TrainingPartition::nearest_index(double t) const {
  const long i = static_cast<long>(std::floor(t / delta_ + 0.5 + 1e-9));
  return std::clamp(i, 0L, m_);
}

bool TrainingPartition::contains(double t, double tol) const {
  const double r = round(t);
  return std::abs(r - t) <= tol * std::max(1.0, std::abs(t));
}

}  // namespace cmlab
