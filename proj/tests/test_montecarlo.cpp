#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "dht/errors.hpp"
#include "dht/montecarlo.hpp"
#include "fixtures.hpp"

using namespace dht;

namespace {

CodecParams dsbs_params(double r = 0.2) {
  const double ixu = std::log(2.0) - fixtures::binary_entropy(0.25);
  const double iuy = std::log(2.0) - fixtures::binary_entropy(0.3);
  CodecParams p;
  p.r = r;
  p.r0_lower = p.r0_upper = ixu;
  p.r_prime = p.threshold = iuy;
  return p;
}

CodecParams wide_open(double threshold) {
  CodecParams p;
  p.r = 0.5;
  p.r0_lower = -10.0;
  p.r0_upper = 1.0;
  p.r_prime = kNegInf;
  p.threshold = threshold;
  return p;
}

SimulationResult synthetic(std::size_t n, double beta, std::uint64_t trials_h1 = 5000) {
  SimulationResult r;
  r.n = n;
  r.trials_h1 = trials_h1;
  r.beta_hat = beta;
  return r;
}

}  // namespace

TEST(TrialSeed, DistinctAcrossIndicesAndHypotheses) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1 << 21);
  for (std::uint64_t i = 0; i < 500000; ++i) {
    ASSERT_TRUE(seen.insert(derive_trial_seed(7, Hypothesis::H0, i)).second);
    ASSERT_TRUE(seen.insert(derive_trial_seed(7, Hypothesis::H1, i)).second);
  }
  EXPECT_EQ(seen.size(), 1000000u);
  EXPECT_EQ(derive_trial_seed(7, Hypothesis::H0, 3), derive_trial_seed(7, Hypothesis::H0, 3));
  EXPECT_NE(derive_trial_seed(7, Hypothesis::H0, 3), derive_trial_seed(8, Hypothesis::H0, 3));
}

TEST(Wilson, ReferenceValues) {
  const Interval half = wilson_interval(5, 10);
  EXPECT_NEAR(half.lo, 0.2366, 1e-4);
  EXPECT_NEAR(half.hi, 0.7634, 1e-4);
  const Interval none = wilson_interval(0, 10);
  EXPECT_EQ(none.lo, 0.0);
  EXPECT_NEAR(none.hi, kWilsonZ95 * kWilsonZ95 / (10.0 + kWilsonZ95 * kWilsonZ95), 1e-12);
  const Interval all = wilson_interval(10, 10);
  EXPECT_NEAR(all.lo, 10.0 / (10.0 + kWilsonZ95 * kWilsonZ95), 1e-12);
  EXPECT_EQ(all.hi, 1.0);
}

TEST(Wilson, ContainsPointAndShrinks) {
  for (std::uint64_t n : {20u, 200u, 2000u, 20000u}) {
    for (std::uint64_t k : {std::uint64_t{0}, n / 7, n / 2, n}) {
      const Interval ci = wilson_interval(k, n);
      const double p = static_cast<double>(k) / n;
      EXPECT_LE(ci.lo, p);
      EXPECT_GE(ci.hi, p);
      EXPECT_GE(ci.lo, 0.0);
      EXPECT_LE(ci.hi, 1.0);
    }
  }
  EXPECT_GT(wilson_interval(50, 100).hi - wilson_interval(50, 100).lo,
            wilson_interval(5000, 10000).hi - wilson_interval(5000, 10000).lo);
}

TEST(Experiment, AlwaysAcceptAndAlwaysReject) {
  // Identical hypotheses, every codeword in T1 and T2.
  const auto model = fixtures::dsbs(0.2, 0.2);
  const TestChannel ch = TestChannel::bsc(0.25);
  const SimulationResult accept = run_experiment(model, ch, wide_open(kNegInf), 4, 400, 3);
  EXPECT_EQ(accept.alpha_hat, 0.0);
  EXPECT_EQ(accept.beta_hat, 1.0);
  EXPECT_EQ(accept.events.e21 + accept.events.e22, accept.trials_h1);
  EXPECT_EQ(accept.diagnostics[0].encoder_failures, 0u);
  const SimulationResult reject = run_experiment(model, ch, wide_open(kPosInf), 4, 400, 3);
  EXPECT_EQ(reject.alpha_hat, 1.0);
  EXPECT_EQ(reject.beta_hat, 0.0);
  EXPECT_EQ(reject.events.e11 + reject.events.e12, reject.trials_h0);
}

TEST(Experiment, SplitAndPartition) {
  const CodecContext ctx(fixtures::dsbs(), TestChannel::bsc(0.25));
  const SimulationResult r = run_experiment(ctx, dsbs_params(), 32, 2001, 7);
  EXPECT_EQ(r.trials_h0, 1000u);
  EXPECT_EQ(r.trials_h1, 1001u);
  EXPECT_DOUBLE_EQ(r.alpha_hat, static_cast<double>(r.events.e11 + r.events.e12) / r.trials_h0);
  EXPECT_DOUBLE_EQ(r.beta_hat, static_cast<double>(r.events.e21 + r.events.e22) / r.trials_h1);
  EXPECT_EQ(r.events.e12, 0u);
  EXPECT_LE(r.diagnostics[0].encoder_failures, r.events.e11);
  EXPECT_TRUE(r.ci_reliable);
  EXPECT_LE(r.ci_alpha.lo, r.alpha_hat);
  EXPECT_GE(r.ci_alpha.hi, r.alpha_hat);
  EXPECT_FALSE(run_experiment(ctx, dsbs_params(), 32, 999, 7).ci_reliable);
}

TEST(Experiment, ThreadCountDoesNotChangeCounts) {
  const CodecContext ctx(fixtures::dsbs(), TestChannel::bsc(0.25));
  RunOptions one, many;
  many.threads = 8;
  const SimulationResult a = run_experiment(ctx, dsbs_params(), 32, 1200, 11, one);
  const SimulationResult b = run_experiment(ctx, dsbs_params(), 32, 1200, 11, many);
  for (ErrorEvent e : {ErrorEvent::E11, ErrorEvent::E12, ErrorEvent::E21, ErrorEvent::E22}) {
    EXPECT_EQ(a.events.at(e), b.events.at(e));
  }
  EXPECT_EQ(a.alpha_hat, b.alpha_hat);
  EXPECT_EQ(a.diagnostics[0].chosen_not_in_t2, b.diagnostics[0].chosen_not_in_t2);
  many.codebook_averaged = one.codebook_averaged = true;
  const SimulationResult c = run_experiment(ctx, dsbs_params(), 16, 300, 11, one);
  const SimulationResult d = run_experiment(ctx, dsbs_params(), 16, 300, 11, many);
  EXPECT_EQ(c.beta_hat, d.beta_hat);
  EXPECT_EQ(c.alpha_hat, d.alpha_hat);
  EXPECT_TRUE(c.codebook_averaged);
}

TEST(Experiment, SeedChangesOutcome) {
  const CodecContext ctx(fixtures::dsbs(), TestChannel::bsc(0.25));
  const SimulationResult a = run_experiment(ctx, dsbs_params(), 32, 1000, 1);
  const SimulationResult b = run_experiment(ctx, dsbs_params(), 32, 1000, 2);
  EXPECT_NE(a.events.e11, b.events.e11);
}

TEST(Experiment, CodebookCapPropagates) {
  const CodecContext ctx(fixtures::dsbs(), TestChannel::bsc(0.25));
  RunOptions opt;
  opt.codebook_cap = 100;
  try {
    run_experiment(ctx, dsbs_params(), 64, 10, 1, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CodebookTooLarge);
  }
}

TEST(Fit, RecoversSyntheticSlope) {
  std::vector<SimulationResult> rs;
  for (std::size_t n : {32, 64, 128, 256}) rs.push_back(synthetic(n, std::exp(-0.08 * n)));
  const ExponentFit fit = fit_exponent(rs, 0.08);
  EXPECT_NEAR(fit.slope_estimate, 0.08, 0.005);
  EXPECT_EQ(fit.points.size(), 4u);
  EXPECT_EQ(*fit.theoretical_theta, 0.08);
}

TEST(Fit, ConstantBetaGivesVanishingExponents) {
  std::vector<SimulationResult> rs;
  for (std::size_t n : {32, 64, 128}) rs.push_back(synthetic(n, 0.1));
  const ExponentFit fit = fit_exponent(rs);
  for (std::size_t i = 1; i < fit.points.size(); ++i) {
    EXPECT_NEAR(fit.points[i].exponent, fit.points[i - 1].exponent / 2.0, 1e-15);
  }
  EXPECT_NEAR(fit.slope_estimate, 3.0 * std::log(10.0) / 224.0, 1e-15);
}

TEST(Fit, ZeroErrorCellsBecomeBounds) {
  std::vector<SimulationResult> rs = {synthetic(32, 0.01), synthetic(64, 0.001), synthetic(128, 0.0)};
  const ExponentFit fit = fit_exponent(rs);
  ASSERT_EQ(fit.zero_error_bounds.size(), 1u);
  EXPECT_NEAR(fit.zero_error_bounds[0].exponent, std::log(5000.0) / 128.0, 1e-15);
  EXPECT_EQ(fit.points.size(), 2u);
}

TEST(Fit, Errors) {
  std::vector<SimulationResult> zeros = {synthetic(8, 0), synthetic(16, 0), synthetic(32, 0)};
  try {
    fit_exponent(zeros);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllZeroErrors);
  }
  std::vector<SimulationResult> two = {synthetic(8, 0.1), synthetic(16, 0.1)};
  EXPECT_THROW(fit_exponent(two), Error);
}

TEST(Csv, RowMatchesHeader) {
  std::ostringstream os;
  write_simulation_csv_header(os);
  SimulationResult r = synthetic(32, 0.25);
  r.trials_h0 = 10;
  r.seed = 42;
  write_simulation_csv_row(os, r);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_EQ(row.rfind("32,10,5000,", 0), 0u);
  EXPECT_EQ(row.substr(row.size() - 3), ",42");
}
