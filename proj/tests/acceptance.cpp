// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmlab/experiment.hpp"
#include "cmlab/metrics.hpp"
#include "cmlab/parallel.hpp"
#include "cmlab/stage_laws.hpp"

using namespace cmlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const TargetDistribution kBernoulli = TargetDistribution::two_point(0.0, 100.0);
const NoiseSchedule kOu = NoiseSchedule::ou();
const TrainingPartition kPartition(0.01, 6000);

// The two-step design and both baselines started at its tau_1.
std::vector<std::pair<std::string, SamplingTimeSchedule>> three_schedules() {
  const auto two = design_two_step_ou(100.0, 0.01, 0.01, kPartition);
  return {{"two_step", two},
          {"uniform", design_uniform(two.first(), 5, kPartition)},
          {"halving", design_halving_ve(two.first(), kPartition)}};
}

double gauss(double x, double m, double v) {
  return std::exp(-(x - m) * (x - m) / (2.0 * v)) / std::sqrt(2.0 * kPi * v);
}

// Grid bracket covering every component of both laws by 12 sd.
std::pair<double, double> bracket(const MarginalView& a, const MarginalView& b, double& min_sd) {
  double lo = 1e300, hi = -1e300;
  min_sd = 1e300;
  for (const auto* m : {&a, &b})
    for (const auto& c : m->components()) {
      const double sd = std::sqrt(c.variance);
      lo = std::min(lo, c.mean(0) - 12.0 * sd);
      hi = std::max(hi, c.mean(0) + 12.0 * sd);
      min_sd = std::min(min_sd, sd);
    }
  return {lo, hi};
}

double grid_kl(const MarginalView& a, const MarginalView& b) {
  double sd = 0.0;
  const auto [lo, hi] = bracket(a, b, sd);
  const auto n = static_cast<std::size_t>(std::clamp(40.0 * (hi - lo) / sd, 2000.0, 2e6));
  return kl_grid([&](double x) { return a.pdf(x); }, [&](double x) { return b.pdf(x); }, lo, hi, n).value;
}

double grid_tv(const MarginalView& a, const MarginalView& b) {
  double sd = 0.0;
  const auto [lo, hi] = bracket(a, b, sd);
  const auto n = static_cast<std::size_t>(std::clamp(40.0 * (hi - lo) / sd, 2000.0, 2e6));
  return tv_grid([&](double x) { return a.pdf(x); }, [&](double x) { return b.pdf(x); }, lo, hi, n).value;
}

// 1. Evaluation error of the quantile-perturbed estimator equals t^2.
Outcome evaluation_error_law() {
  const auto f = exact_two_point(kBernoulli, kOu);
  const auto fh = quantile_perturbed(kBernoulli, kOu, 1e-4);
  const auto e2 = evaluation_error(fh, f, MarginalView(kBernoulli, kOu, 2.0), 4000000, 101);
  const auto e10 = evaluation_error(fh, f, MarginalView(kBernoulli, kOu, 10.0), 1000000, 102);
  const double r2 = std::abs(e2.mean / 4.0 - 1.0);
  const double r10 = std::abs(e10.mean / 100.0 - 1.0);
  return {r2 <= 0.15 && r10 <= 0.05, "t=2: " + fmt("%.4f", e2.mean) + " vs 4 (rel " + fmt("%.2f%%", 100 * r2) +
                                          ", tol 15%); t=10: " + fmt("%.3f", e10.mean) + " vs 100 (rel " +
                                          fmt("%.2f%%", 100 * r10) + ", tol 5%)"};
}

// 2. Multistep sampling with the exact oracle.
Outcome exact_oracle_fidelity() {
  const auto f = exact_two_point(kBernoulli, kOu);
  const std::size_t n = 100000;
  bool pass = true;
  std::string detail;
  std::uint64_t seed = 200;
  for (const auto& [label, taus] : three_schedules()) {
    const auto rec = multistep_sample(f, kOu, taus, 1, n, ++seed);
    const auto out = rec.output().col(0);
    const double p = static_cast<double>((out.array() == 100.0).count()) / static_cast<double>(n);
    const double z = std::abs(p - 0.5) / std::sqrt(0.25 / static_cast<double>(n));
    const double w2 = w2_vs_target_1d(out, kBernoulli);
    pass = pass && z <= 5.0 && w2 < 1.0;
    detail += label + ": p=" + fmt("%.5f", p) + " (" + fmt("%.2f", z) + " se) W2=" + fmt("%.3f", w2) + "; ";
  }
  return {pass, detail + "need |z|<=5 and W2<1.0"};
}

// 3. PF-ODE consistency function against the closed-form threshold rule.
Outcome pf_ode_vs_threshold() {
  const auto exact = exact_two_point(kBernoulli, kOu);
  const auto ode = pf_ode_consistency(kBernoulli, kOu);
  bool pass = true;
  std::string detail;
  for (double t : {1.0, 2.0, 5.0}) {
    const MarginalView m(kBernoulli, kOu, t);
    const Samples x = m.sample(10000, 300 + static_cast<std::uint64_t>(t));
    const Samples a = exact.eval_batch(x, t);
    const Samples b = ode.eval_batch(x, t);
    long disagree = 0, outside_band = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (a(i, 0) == b(i, 0)) continue;
      ++disagree;
      if (std::abs(m.cdf(x(i, 0)) - 0.5) > 1e-3) ++outside_band;
    }
    const double agree = 1.0 - static_cast<double>(disagree) / static_cast<double>(x.rows());
    pass = pass && agree >= 0.999 && outside_band == 0;
    detail += "t=" + fmt("%g", t) + ": agree " + fmt("%.4f", agree) + ", " + std::to_string(outside_band) +
              " outside band; ";
  }
  return {pass, detail + "need >=0.999 and 0 outside"};
}

// 4. Empirical W2 under the refined bound at every stage.
Outcome bound_validity() {
  const auto two = design_two_step_ou(100.0, 0.01, 0.01, kPartition);
  nlohmann::json j{{"target", {{"type", "discrete"}, {"atoms", {{0, 0.5}, {100, 0.5}}}}},
                   {"schedule", "ou"},
                   {"estimator", {{"estimator", "quantile_perturbed"}, {"kappa", 1e-4}}},
                   {"partition", {{"delta", 0.01}}},
                   {"eps_over_delta", "measured"},
                   {"n", 100000},
                   {"seed", 400},
                   {"designs",
                    {{{"schedule_design", "explicit"}, {"label", "one_step"}, {"taus", {two.first()}}},
                     {{"schedule_design", "two_step_ou"}, {"label", "two_step"}},
                     {{"schedule_design", "uniform"}, {"label", "uniform"}, {"T", two.first()}, {"N", 5}},
                     {{"schedule_design", "halving_ve"}, {"label", "halving"}, {"T", two.first()}}}}};
  const auto result = run_experiment(parse_config(j));
  bool pass = true;
  double worst = -1e300;
  std::string where;
  for (const auto& r : result.rows) {
    const double margin = r.w2 - (r.bound_modified + 3.0 * r.w2_stderr);
    if (margin > worst) {
      worst = margin;
      where = r.schedule_label + " stage " + std::to_string(r.stage);
    }
    pass = pass && margin <= 0.0;
  }
  return {pass, std::to_string(result.rows.size()) + " rows; tightest " + where + " with W2 - (bound + 3se) = " +
                    fmt("%.3f", worst)};
}

// 5. Two-step improvement under the reproduce-sim defaults.
Outcome two_step_improvement() {
  const auto result = run_experiment(reproduce_config(ReproduceOptions{}));
  double first = 0.0, last = 0.0, best = 1e300;
  std::string best_at;
  for (const auto& r : result.rows) {
    if (r.schedule_label == "two_step") {
      if (r.stage == 1) first = r.w2;
      last = r.w2;
    } else if (r.w2 < best) {
      best = r.w2;
      best_at = r.schedule_label + " stage " + std::to_string(r.stage);
    }
  }
  const bool pass = last < first && last <= 1.5 * best;
  return {pass, "two-step W2 " + fmt("%.3f", first) + " -> " + fmt("%.3f", last) + "; best baseline " +
                    fmt("%.3f", best) + " (" + best_at + "), ratio " + fmt("%.3f", last / best) + " (need <= 1.5)"};
}

// 6. Bound ratio between the two-step and one-step designs.
Outcome bound_ratio() {
  const auto two = design_two_step_ou(100.0, 0.01, 0.01, kPartition);
  auto inputs = [&](const SamplingTimeSchedule& s) {
    BoundInputs in(kOu, s, 1.0);
    in.with_geometry(geometry(kBernoulli));
    return in;
  };
  const auto one = two.prefix(1);
  const double general = w2_bound_general(inputs(two)).total / w2_bound_general(inputs(one)).total;
  const double refined = w2_bound_modified(inputs(two)).total / w2_bound_modified(inputs(one)).total;
  const double leading = two.last() / one.last();
  return {general >= 0.60 && general <= 0.72,
          "general " + fmt("%.4f", general) + " (need [0.60, 0.72]); refined " + fmt("%.4f", refined) +
              "; last-term ratio tau_2/tau_1 " + fmt("%.4f", leading)};
}

// 7. KL between exact and sampler stage marginals against kl_bound.
Outcome kl_decomposition() {
  const auto fh = quantile_perturbed(kBernoulli, kOu, 1e-4);
  const auto f_rule = exact_two_point(kBernoulli, kOu).threshold_rule();
  bool pass = true;
  std::string detail;
  for (const auto& [label, taus] : three_schedules()) {
    // Exact eps/delta of a threshold estimator: 100 sqrt(|F(a) - F(m)|) / tau.
    double ratio = 0.0;
    for (double t : taus.taus()) {
      const MarginalView m(kBernoulli, kOu, t);
      const double mass = std::abs(m.cdf(fh.threshold_rule()->threshold(t)) - m.cdf(f_rule->threshold(t)));
      ratio = std::max(ratio, 100.0 * std::sqrt(mass) / t);
    }
    BoundInputs in(kOu, taus, ratio);
    in.with_geometry(geometry(kBernoulli));
    const auto laws = analytic_stage_laws(fh, kOu, taus, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < laws.size(); ++i) {
      const double kl = grid_kl(MarginalView(kBernoulli, kOu, laws[i].tau), laws[i].noisy);
      const double bound = kl_bound(in, i + 1);
      worst = std::max(worst, kl / bound);
      pass = pass && kl <= 1.1 * bound;
    }
    detail += label + ": max KL/bound " + fmt("%.3g", worst) + "; ";
  }
  return {pass, detail + "need <= 1.1"};
}

// 8. SDE contraction on random two-atom pairs.
Outcome sde_contraction() {
  std::mt19937_64 rng(800);
  std::uniform_real_distribution<double> atom(-3.0, 3.0), time(0.5, 3.0);
  const NoiseSchedule schedules[2] = {NoiseSchedule::ou(), NoiseSchedule::ve()};
  auto two_atoms = [](double a, double b) {
    return TargetDistribution::discrete({{Vector::Constant(1, a), 0.5}, {Vector::Constant(1, b), 0.5}});
  };
  double worst = 0.0;
  bool pass = true;
  for (int k = 0; k < 100; ++k) {
    const double a1 = atom(rng), a2 = atom(rng), b1 = atom(rng), b2 = atom(rng);
    const auto& s = schedules[k % 2];
    const double t = time(rng);
    const double w2_sq = std::min(0.5 * ((a1 - b1) * (a1 - b1) + (a2 - b2) * (a2 - b2)),
                                  0.5 * ((a1 - b2) * (a1 - b2) + (a2 - b1) * (a2 - b1)));
    const double kl = grid_kl(MarginalView(two_atoms(a1, a2), s, t), MarginalView(two_atoms(b1, b2), s, t));
    const double bound = sde_contraction_bound(s, t, w2_sq);
    worst = std::max(worst, kl / bound);
    pass = pass && kl <= bound * (1.0 + 1e-9);
  }
  double worst_eq = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double a = atom(rng), b = atom(rng), t = time(rng);
    const auto& s = schedules[k % 2];
    const auto pa = TargetDistribution::discrete({{Vector::Constant(1, a), 1.0}});
    const auto pb = TargetDistribution::discrete({{Vector::Constant(1, b), 1.0}});
    const double kl = grid_kl(MarginalView(pa, s, t), MarginalView(pb, s, t));
    const double bound = sde_contraction_bound(s, t, (a - b) * (a - b));
    worst_eq = std::max(worst_eq, std::abs(kl / bound - 1.0));
  }
  pass = pass && worst_eq <= 1e-6;
  return {pass, "100 pairs, max KL/bound " + fmt("%.4f", worst) + "; single atoms max rel gap " +
                    fmt("%.2e", worst_eq) + " (need <= 1e-6)"};
}

// 9. TV of the smoothed output against the TV bound, Gaussian target.
Outcome tv_bound_check() {
  nlohmann::json j{
      {"target", {{"type", "gmm"}, {"components", {{{"mean", 0}, {"variance", 1}, {"weight", 1}}}}, {"L", 1}}},
      {"schedule", "ou"},
      {"estimator", {{"estimator", "gain_perturbed"}, {"eta", 0.01}}},
      {"schedule_design", "explicit"},
      {"taus", {5.0, 2.0, 0.5}},
      {"eps_over_delta", "measured"},
      {"n", 200000},
      {"seed", 900}};
  const auto cfg = parse_config(j);
  const auto fh = make_estimator(cfg);
  const auto taus = make_design(cfg, cfg.designs[0], make_partition(cfg));
  const double ratio = measured_eps_over_delta(fh, cfg, taus.taus(), cfg.n, cfg.seed);
  const auto laws = analytic_stage_laws(fh, cfg.schedule, taus, 1);
  const MarginalView target(cfg.target, NoiseSchedule::ve(), 0.0);
  bool pass = true;
  std::string detail = "eps/delta " + fmt("%.4f", ratio) + "; ";
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const double sigma = sigma_eps_optimal(laws[i].tau, ratio, 1.0, 1.0);
    auto comps = laws[i].output.components();
    for (auto& c : comps) c.variance += sigma * sigma;
    const double tv = grid_tv(MarginalView::from_mixture(comps), target);
    BoundInputs in(cfg.schedule, taus.prefix(i + 1), ratio);
    in.with_geometry(geometry(cfg.target));
    in.sigma_eps = sigma;
    const double bound = tv_bound(in).total;
    pass = pass && tv <= bound;
    detail += "stage " + std::to_string(i + 1) + " TV " + fmt("%.4g", tv) + " <= " + fmt("%.4g", bound) + "; ";
  }
  return {pass, detail};
}

// 10. Metric oracles.
Outcome metric_oracles() {
  std::mt19937_64 rng(1000);
  std::uniform_int_distribution<int> size(1, 7);
  std::normal_distribution<double> z(0.0, 2.0);
  int exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a(i) = z(rng);
      b(i) = z(rng);
    }
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best = 1e300;
    do {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += (a(i) - b(perm[i])) * (a(i) - b(perm[i]));
      best = std::min(best, acc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double brute = std::sqrt(best / n);
    // Sorting and brute force add the same terms in different orders.
    if (std::abs(w2_empirical_1d(a, b) - brute) <= 1e-12 * std::max(1.0, brute)) ++exact;
  }
  double tv_err = 0.0, kl_err = 0.0;
  for (double mu : {0.25, 1.0, 2.0, 3.5}) {
    auto pa = [](double x) { return gauss(x, 0.0, 1.0); };
    auto pb = [mu](double x) { return gauss(x, mu, 1.0); };
    tv_err = std::max(tv_err, std::abs(tv_grid(pa, pb, -12.0, 12.0 + mu, 10000).value -
                                       (2.0 * normal_cdf(mu / 2.0) - 1.0)));
    kl_err = std::max(kl_err, std::abs(kl_grid(pa, pb, -12.0, 12.0 + mu, 10000).value - mu * mu / 2.0));
  }
  return {exact == 200 && tv_err <= 1e-5 && kl_err <= 1e-5,
          "W2 " + std::to_string(exact) + "/200 match; TV err " + fmt("%.1e", tv_err) + ", KL err " +
              fmt("%.1e", kl_err) + " (tol 1e-5)"};
}

// 11. Byte-identical reproduce-sim CSV across runs and thread counts.
Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  auto run = [&](int threads, const std::string& name) {
    const auto out = dir / name;
    const std::string cmd = std::string(CMLAB_CLI) + " reproduce-sim --seed 11 --threads " +
                            std::to_string(threads) + " --out " + out.string() + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) return std::string("<failed>");
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const auto a = run(1, "cmlab_det_a.csv");
  const auto b = run(1, "cmlab_det_b.csv");
  const auto c = run(4, "cmlab_det_c.csv");
  const bool pass = a != "<failed>" && a == b && a == c && !a.empty();
  return {pass, std::string("repeat ") + (a == b ? "identical" : "DIFFERENT") + ", 1 vs 4 threads " +
                    (a == c ? "identical" : "DIFFERENT") + ", " + std::to_string(a.size()) + " bytes"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "evaluation-error law", 30, evaluation_error_law},
      {2, "exact-oracle fidelity", 10, exact_oracle_fidelity},
      {3, "PF-ODE vs closed form", 60, pf_ode_vs_threshold},
      {4, "bound validity (refined bound)", 120, bound_validity},
      {5, "two-step improvement", 1e300, two_step_improvement},
      {6, "bound-ratio structure", 1, bound_ratio},
      {7, "KL decomposition", 30, kl_decomposition},
      {8, "SDE contraction", 60, sde_contraction},
      {9, "TV bound", 60, tv_bound_check},
      {10, "metric oracles", 10, metric_oracles},
      {11, "determinism", 60, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s  %2d  %-32s %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
