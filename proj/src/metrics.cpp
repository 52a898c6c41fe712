// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cmlab/metrics.hpp"

#include <numeric>

namespace cmlab {
namespace {

constexpr double kDensityFloor = 1e-300;

void require_1d(const TargetDistribution& target) {
  if (target.dim() != 1) throw DomainError("metric requires a one-dimensional target");
}

// Simpson weights over n (even) intervals.
template <class F>
double simpson(const F& f, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = f(lo) + f(hi);
  for (std::size_t i = 1; i < n; ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(i));
  return acc * h / 3.0;
}

std::size_t even_intervals(std::size_t n_grid) {
  if (n_grid < 1000) throw DomainError("grid metrics need n_grid >= 1000");
  return n_grid % 2 == 0 ? n_grid : n_grid + 1;
}

void check_truncation(const GridReport& r) {
  if (std::max(std::abs(r.truncation_a), std::abs(r.truncation_b)) > 1e-3)
    throw DomainError("grid metric: truncation mass above 1e-3; widen [lo, hi]");
}

std::vector<double> sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

// Atoms of a 1-D law sorted by location, with cumulative weights.
std::vector<std::pair<double, double>> atom_cdf(const MarginalView& law) {
  std::vector<std::pair<double, double>> atoms;
  for (const auto& c : law.components()) {
    if (c.variance > 0.0) throw DomainError("w2_atoms_1d: law has a continuous component");
    atoms.emplace_back(c.mean(0), c.weight);
  }
  std::sort(atoms.begin(), atoms.end());
  double acc = 0.0;
  for (auto& [x, w] : atoms) w = (acc += w);
  atoms.back().second = 1.0;
  return atoms;
}

}  // namespace

namespace {

// Generalized inverse CDF of a 1-D target, prepared once for many levels.
std::function<double(double)> quantile_fn(const TargetDistribution& target) {
  require_1d(target);
  if (target.kind() == TargetKind::Discrete) {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& c : target.components()) atoms.emplace_back(c.mean(0), c.weight);
    std::sort(atoms.begin(), atoms.end());
    double acc = 0.0;
    for (auto& [x, w] : atoms) w = (acc += w);
    return [atoms](double u) {
      for (const auto& [x, cum] : atoms)
        if (cum >= u) return x;
      return atoms.back().first;
    };
  }
  MarginalView view(target, NoiseSchedule::ve(), 0.0);
  return [view](double u) { return view.quantile(u); };
}

}  // namespace

double target_quantile_1d(const TargetDistribution& target, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  return quantile_fn(target)(u);
}

double w2_vs_target_1d(const Eigen::Ref<const Eigen::VectorXd>& samples,
                       const TargetDistribution& target) {
  const auto quantile = quantile_fn(target);
  const auto x = sorted_copy(samples);
  if (x.empty()) throw DomainError("w2_vs_target_1d: empty samples");
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double q = quantile((static_cast<double>(k) + 0.5) / n);
    acc += (x[k] - q) * (x[k] - q);
  }
  return std::sqrt(acc / n);
}

double w2_stderr_proxy(const Eigen::Ref<const Eigen::VectorXd>& samples,
                       const TargetDistribution& target) {
  require_1d(target);
  const auto n = static_cast<std::size_t>(samples.size());
  const auto& comps = target.components();
  if (target.kind() == TargetKind::Discrete && comps.size() == 2) {
    const double lo = std::min(comps[0].mean(0), comps[1].mean(0));
    const double hi = std::max(comps[0].mean(0), comps[1].mean(0));
    const double gap = hi - lo;
    std::size_t below = 0;
    for (Eigen::Index i = 0; i < samples.size(); ++i) below += samples(i) < 0.5 * (lo + hi);
    const double p = static_cast<double>(below) / static_cast<double>(n);
    const double se_p = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n)) /
                                  static_cast<double>(n));
    const double w2 = w2_vs_target_1d(samples, target);
    const double cap = gap * std::sqrt(se_p);
    return w2 > 0.0 ? std::min(gap * gap * se_p / (2.0 * w2), cap) : cap;
  }
  constexpr std::size_t kBatches = 20;
  if (n < kBatches * 2) return 0.0;
  const std::size_t len = n / kBatches;
  Eigen::VectorXd per(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b)
    per(static_cast<Eigen::Index>(b)) =
        w2_vs_target_1d(samples.segment(static_cast<Eigen::Index>(b * len), static_cast<Eigen::Index>(len)), target);
  const double mean = per.mean();
  const double var = (per.array() - mean).square().sum() / static_cast<double>(kBatches - 1);
  // Batch spread scales like 1/sqrt(len); rescale to the full sample.
  return std::sqrt(var / static_cast<double>(kBatches));
}

double w2_atoms_1d(const MarginalView& a, const MarginalView& b) {
  if (a.dim() != 1 || b.dim() != 1) throw DomainError("w2_atoms_1d: one-dimensional laws only");
  const auto ca = atom_cdf(a);
  const auto cb = atom_cdf(b);
  // Walk the merged breakpoints of both quantile functions.
  double acc = 0.0, u = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ca.size() && j < cb.size()) {
    const double next = std::min(ca[i].second, cb[j].second);
    const double d = ca[i].first - cb[j].first;
    acc += (next - u) * d * d;
    u = next;
    if (ca[i].second <= next) ++i;
    if (cb[j].second <= next) ++j;
  }
  return std::sqrt(std::max(acc, 0.0));
}

double tv_atoms(const Eigen::Ref<const Eigen::VectorXd>& samples, const TargetDistribution& target) {
  require_1d(target);
  if (target.kind() != TargetKind::Discrete) throw DomainError("tv_atoms: discrete targets only");
  const auto& comps = target.components();
  std::vector<double> counts(comps.size(), 0.0);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < comps.size(); ++k)
      if (std::abs(samples(i) - comps[k].mean(0)) < std::abs(samples(i) - comps[best].mean(0)))
        best = k;
    counts[best] += 1.0;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k)
    acc += std::abs(counts[k] / static_cast<double>(samples.size()) - comps[k].weight);
  return 0.5 * acc;
}

GridReport tv_grid(const Density1d& pdf_a, const Density1d& pdf_b, double lo, double hi,
                   std::size_t n_grid) {
  const std::size_t n = even_intervals(n_grid);
  GridReport r;
  r.value = 0.5 * simpson([&](double x) { return std::abs(pdf_a(x) - pdf_b(x)); }, lo, hi, n);
  r.truncation_a = 1.0 - simpson(pdf_a, lo, hi, n);
  r.truncation_b = 1.0 - simpson(pdf_b, lo, hi, n);
  check_truncation(r);
  return r;
}

GridReport kl_grid(const Density1d& pdf_a, const Density1d& pdf_b, double lo, double hi,
                   std::size_t n_grid) {
  const std::size_t n = even_intervals(n_grid);
  GridReport r;
  r.value = simpson(
      [&](double x) {
        const double pa = pdf_a(x);
        if (pa <= kDensityFloor) return 0.0;
        const double pb = pdf_b(x);
        if (pb <= 0.0) throw DomainError("kl_grid: p_b vanishes where p_a does not");
        return pa * std::log(pa / pb);
      },
      lo, hi, n);
  r.truncation_a = 1.0 - simpson(pdf_a, lo, hi, n);
  r.truncation_b = 1.0 - simpson(pdf_b, lo, hi, n);
  check_truncation(r);
  return r;
}

std::vector<double> smoothed_empirical_density(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                               double sigma, double lo, double hi,
                                               std::size_t n_grid) {
  if (!(sigma > 0.0)) throw DomainError("smoothing bandwidth must be positive");
  const std::size_t n = even_intervals(n_grid);
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> mass(n + 1, 0.0);
  // Linear binning onto the grid nodes.
  const double w = 1.0 / static_cast<double>(samples.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const double pos = (samples(i) - lo) / h;
    if (pos <= 0.0) {
      mass.front() += w;
    } else if (pos >= static_cast<double>(n)) {
      mass.back() += w;
    } else {
      const auto k = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(k);
      mass[k] += w * (1.0 - frac);
      mass[k + 1] += w * frac;
    }
  }
  const auto reach = static_cast<long>(std::ceil(10.0 * sigma / h));
  std::vector<double> kernel(static_cast<std::size_t>(2 * reach + 1));
  for (long j = -reach; j <= reach; ++j) {
    const double z = static_cast<double>(j) * h / sigma;
    kernel[static_cast<std::size_t>(j + reach)] = std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * sigma);
  }
  std::vector<double> density(n + 1, 0.0);
  for (std::size_t k = 0; k <= n; ++k) {
    if (mass[k] == 0.0) continue;
    const long lo_j = std::max(-reach, -static_cast<long>(k));
    const long hi_j = std::min(reach, static_cast<long>(n - k));
    for (long j = lo_j; j <= hi_j; ++j)
      density[static_cast<std::size_t>(static_cast<long>(k) + j)] +=
          mass[k] * kernel[static_cast<std::size_t>(j + reach)];
  }
  return density;
}

double tv_tabulated(const std::vector<double>& values, const Density1d& pdf, double lo, double hi) {
  if (values.size() < 3 || values.size() % 2 == 0)
    throw DomainError("tv_tabulated: need an odd number of grid values");
  const std::size_t n = values.size() - 1;
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += wgt * std::abs(values[i] - pdf(lo + h * static_cast<double>(i)));
  }
  return 0.5 * acc * h / 3.0;
}

}  // namespace cmlab
