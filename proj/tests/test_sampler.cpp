// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "cmlab/parallel.hpp"
#include "cmlab/sampler.hpp"
#include "cmlab/stage_laws.hpp"

using namespace cmlab;

namespace {

const TargetDistribution kBernoulli = TargetDistribution::two_point(0.0, 100.0);

std::vector<double> taus_of(const SamplingTimeSchedule& s) { return s.taus(); }

}  // namespace

TEST(SamplingTimeSchedule, Validation) {
  EXPECT_THROW(SamplingTimeSchedule({}), DomainError);
  EXPECT_THROW(SamplingTimeSchedule({2.0, 2.0}), DomainError);
  EXPECT_THROW(SamplingTimeSchedule({1.0, 2.0}), DomainError);
  EXPECT_THROW(SamplingTimeSchedule({1.0, 0.0}), DomainError);
  const SamplingTimeSchedule s({3.0, 2.0, 1.0});
  EXPECT_EQ(s.prefix(2).taus(), (std::vector<double>{3.0, 2.0}));
  EXPECT_TRUE(s.aligned_to(TrainingPartition(1.0, 5)));
  EXPECT_FALSE(s.aligned_to(TrainingPartition(2.0, 5)));
}

TEST(Designs, TwoStepOu) {
  const auto a = design_two_step_ou(100.0, 1.0, 1.0, TrainingPartition(1e-6, 30000000));
  EXPECT_NEAR(a.taus()[0], 13.815510557964274, 1e-6);
  EXPECT_NEAR(a.taus()[1], 9.2103403719761827, 1e-6);
  const auto b = design_two_step_ou(100.0, 0.1, 1.0, TrainingPartition(1e-6, 30000000));
  EXPECT_NEAR(b.taus()[0], 18.420680743952365, 1e-6);
  EXPECT_NEAR(b.taus()[1], 11.512925464970228, 1e-6);
  const auto c = design_two_step_ou(100.0, 0.01, 0.01, TrainingPartition(0.01, 3000));
  EXPECT_EQ(taus_of(c), (std::vector<double>{13.82, 9.21}));
  EXPECT_THROW(design_two_step_ou(100.0, 100.0, 1.0, TrainingPartition(0.01, 3000)), DomainError);
}

TEST(Designs, HalvingVe) {
  EXPECT_EQ(taus_of(design_halving_ve(8.0, TrainingPartition(1.0, 10))), (std::vector<double>{8, 4, 2, 1}));
  EXPECT_EQ(taus_of(design_halving_ve(1.0, TrainingPartition(1.0, 10))), (std::vector<double>{1}));
  // 2.5 sits on a tie and rounds up.
  EXPECT_EQ(taus_of(design_halving_ve(5.0, TrainingPartition(1.0, 10))), (std::vector<double>{5, 3, 1}));
  const auto h = design_halving_ve(13.82, TrainingPartition(0.01, 3000));
  EXPECT_EQ(h.n_steps(), 11u);
  EXPECT_DOUBLE_EQ(h.last(), 0.01);
}

TEST(Designs, Uniform) {
  EXPECT_EQ(taus_of(design_uniform(10.0, 5, TrainingPartition(1.0, 10))), (std::vector<double>{10, 8, 6, 4, 2}));
  EXPECT_EQ(taus_of(design_uniform(7.0, 1, TrainingPartition(1.0, 10))), (std::vector<double>{7}));
  EXPECT_THROW(design_uniform(2.0, 4, TrainingPartition(1.0, 10)), DomainError);
  EXPECT_THROW(design_uniform(20.0, 2, TrainingPartition(1.0, 10)), DomainError);
}

TEST(MultistepSample, SingleStepOracleIsBalanced) {
  const auto ou = NoiseSchedule::ou();
  const auto f = exact_two_point(kBernoulli, ou);
  const std::size_t n = 100000;
  const auto rec = multistep_sample(f, ou, SamplingTimeSchedule({10.0}), 1, n, 3);
  ASSERT_EQ(rec.denoised.size(), 1u);
  const double p = static_cast<double>((rec.output().col(0).array() == 100.0).count()) / n;
  EXPECT_NEAR(p, 0.5, 4.0 * std::sqrt(0.25 / n));
  EXPECT_EQ((rec.output().col(0).array() == 0.0).count() + (rec.output().col(0).array() == 100.0).count(),
            static_cast<Eigen::Index>(n));
  // Stage-1 input is pure N(0, sigma^2(10)) noise.
  const double var = rec.noisy[0].col(0).array().square().mean();
  EXPECT_NEAR(var, ou.sigma2(10.0), 0.02);
}

TEST(MultistepSample, DeterministicAndThreadInvariant) {
  const auto ou = NoiseSchedule::ou();
  const auto f = quantile_perturbed(kBernoulli, ou);
  const SamplingTimeSchedule taus({13.82, 9.21, 4.0});
  set_thread_count(1);
  const auto a = multistep_sample(f, ou, taus, 1, 30000, 17);
  set_thread_count(3);
  const auto b = multistep_sample(f, ou, taus, 1, 30000, 17);
  set_thread_count(0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(a.noisy[i] == b.noisy[i]);
    EXPECT_TRUE(a.denoised[i] == b.denoised[i]);
  }
  const auto c = multistep_sample(f, ou, taus, 1, 30000, 18);
  EXPECT_FALSE(a.output() == c.output());
}

TEST(MultistepSample, MatchesAnalyticStageLaws) {
  const auto ou = NoiseSchedule::ou();
  const auto f = quantile_perturbed(kBernoulli, ou, 1e-3);
  const SamplingTimeSchedule taus({13.82, 9.21, 5.0, 2.0});
  const std::size_t n = 200000;
  const auto rec = multistep_sample(f, ou, taus, 1, n, 23);
  const auto laws = analytic_stage_laws(f, ou, taus, 1);
  ASSERT_EQ(laws.size(), 4u);
  for (std::size_t i = 0; i < laws.size(); ++i) {
    double p_hi = 0.0;
    for (const auto& c : laws[i].output.components())
      if (c.mean(0) == 100.0) p_hi = c.weight;
    const double emp = static_cast<double>((rec.denoised[i].col(0).array() == 100.0).count()) / n;
    EXPECT_NEAR(emp, p_hi, 4.0 * std::sqrt(p_hi * (1.0 - p_hi) / n) + 1e-12) << "stage " << i + 1;
    const double m = rec.noisy[i].col(0).mean();
    EXPECT_NEAR(m, laws[i].noisy.mean_1d(), 4.0 * std::sqrt(laws[i].noisy.variance_1d() / n));
  }
}

TEST(Smoothing, TinySigmaBarelyMoves) {
  Samples x = Samples::Random(10000, 1);
  const Samples y = smooth_output(x, 1e-12, 5);
  EXPECT_LT((y - x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(smooth_output(x, 0.3, 5) == smooth_output(x, 0.3, 5));
  EXPECT_THROW(smooth_output(x, 0.0, 5), DomainError);
}

TEST(Smoothing, OptimalSigma) {
  EXPECT_DOUBLE_EQ(sigma_eps_optimal(1.0, 1.0, 1.0, 1.0), 0.5);
  EXPECT_NEAR(sigma_eps_optimal(0.04, 1.0, 1.0, 1.0), 0.1, 1e-15);
}
