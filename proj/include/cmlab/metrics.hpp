// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "cmlab/core.hpp"
#include "cmlab/target_dist.hpp"

namespace cmlab {

struct MetricReport {
  double w2 = 0.0;
  double w2_stderr = 0.0;
  std::optional<double> tv;
  std::optional<double> kl;
};

/// Exact W2 between two equally sized empirical measures on the line
/// (sorted coupling).
template <typename DerivedA, typename DerivedB>
double w2_empirical_1d(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b) {
  if (a.size() != b.size()) throw DomainError("w2_empirical_1d: sample sizes differ");
  if (a.size() == 0) throw DomainError("w2_empirical_1d: empty samples");
  std::vector<double> x(static_cast<std::size_t>(a.size()));
  std::vector<double> y(x.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    x[static_cast<std::size_t>(i)] = a.derived().coeff(i);
    y[static_cast<std::size_t>(i)] = b.derived().coeff(i);
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

/// Generalized inverse CDF of a one-dimensional target.
double target_quantile_1d(const TargetDistribution& target, double u);

/// W2 between samples and a one-dimensional target through the quantile
/// coupling: the k-th order statistic meets Q((k - 1/2) / n).
double w2_vs_target_1d(const Eigen::Ref<const Eigen::VectorXd>& samples,
                       const TargetDistribution& target);

/// Standard-error proxy for w2_vs_target_1d: a binomial delta method for
/// two-atom targets, batch means (20 batches) otherwise.
double w2_stderr_proxy(const Eigen::Ref<const Eigen::VectorXd>& samples,
                       const TargetDistribution& target);

/// Exact W2 between two one-dimensional laws made only of atoms.
double w2_atoms_1d(const MarginalView& a, const MarginalView& b);

/// Half the L1 distance between atom proportions after nearest-atom
/// classification. Sanity checks only; not a smooth-target TV.
double tv_atoms(const Eigen::Ref<const Eigen::VectorXd>& samples, const TargetDistribution& target);

using Density1d = std::function<double(double)>;

struct GridReport {
  double value = 0.0;
  double truncation_a = 0.0;  // 1 - integral of p_a over [lo, hi]
  double truncation_b = 0.0;
};

/// (1/2) * Simpson integral of |p_a - p_b| over [lo, hi]. Truncation mass
/// above 1e-3 on either density is an error.
GridReport tv_grid(const Density1d& pdf_a, const Density1d& pdf_b, double lo, double hi,
                   std::size_t n_grid);

/// Simpson integral of p_a log(p_a / p_b) with 0 log 0 = 0.
GridReport kl_grid(const Density1d& pdf_a, const Density1d& pdf_b, double lo, double hi,
                   std::size_t n_grid);

/// Density of an empirical sample convolved with N(0, sigma^2), evaluated on
/// an even-interval grid over [lo, hi] via binning at the grid spacing.
std::vector<double> smoothed_empirical_density(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                               double sigma, double lo, double hi,
                                               std::size_t n_grid);

/// Simpson TV between tabulated density values and an analytic density.
double tv_tabulated(const std::vector<double>& values, const Density1d& pdf, double lo, double hi);

}  // namespace cmlab
