#include <gtest/gtest.h>

#include <cmath>

#include "dht/errors.hpp"
#include "dht/exponent_calc.hpp"
#include "fixtures.hpp"

using namespace dht;

namespace {

const double kIxu = std::log(2.0) - fixtures::binary_entropy(0.25);
const double kIuy = std::log(2.0) - fixtures::binary_entropy(0.3);

SpectralInputs exact(double sup_xu, double inf_xu, double inf_uy, double d) {
  SpectralInputs si;
  si.i_sup_xu = sup_xu;
  si.i_inf_xu = inf_xu;
  si.i_inf_uy = inf_uy;
  si.d_inf = d;
  return si;
}

GaussianJointSource scalar_source(double c0, double c1 = 0.0) {
  GaussianJointSource s;
  s.acf_x = {1.0};
  s.acf_y = {1.0};
  s.ccf_h0 = {{c0}, {}};
  s.ccf_h1 = {{c1}, {}};
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dht::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Theorem1, DsbsReferencePoint) {
  const ExponentReport r = theorem1_bound(exact(kIxu, kIxu, kIuy, kIuy), 0.2);
  EXPECT_NEAR(r.binning_term, 0.2 - (kIxu - kIuy), 1e-15);
  EXPECT_NEAR(r.binning_term, 0.1515, 5e-5);
  EXPECT_NEAR(r.decision_term, 0.0823, 5e-5);
  EXPECT_DOUBLE_EQ(r.theta, r.decision_term);
  EXPECT_EQ(r.regime, Regime::DecisionLimited);
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.penalty, 0.0);
}

TEST(Theorem1, FeasibilityBoundary) {
  const SpectralInputs si = exact(kIxu, kIxu, kIuy, kIuy);
  const double boundary = kIxu - kIuy;
  EXPECT_NEAR(boundary, 0.0485, 5e-5);
  const ExponentReport at = theorem1_bound(si, boundary);
  EXPECT_NEAR(at.binning_term, 0.0, 1e-15);
  EXPECT_FALSE(at.feasible);
  EXPECT_EQ(at.regime, Regime::Infeasible);
  EXPECT_TRUE(theorem1_bound(si, boundary + 1e-6).feasible);
}

TEST(Theorem1, PenaltyAndNegativeTheta) {
  const ExponentReport r = theorem1_bound(exact(0.5, 0.1, 0.2, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(r.penalty, -0.4);
  EXPECT_NEAR(r.decision_term, -0.3, 1e-15);
  EXPECT_NEAR(r.theta, -0.3, 1e-15);
  EXPECT_EQ(r.theta_clamped, 0.0);
}

TEST(Theorem1, TiesGoToDecisionLimited) {
  const ExponentReport r = theorem1_bound(exact(0.25, 0.25, 0.0, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(r.binning_term, r.decision_term);
  EXPECT_EQ(r.regime, Regime::DecisionLimited);
}

TEST(Theorem1, Preconditions) {
  EXPECT_EQ(code_of([] { theorem1_bound(exact(0.1, 0.2, 0.0, 0.1), 0.2); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { theorem1_bound(exact(0.1, 0.1, 0.0, kPosInf), 0.2); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { theorem1_bound(exact(0.1, 0.1, 0.0, 0.1), 0.0); }),
            ErrorCode::InvalidArgument);
}

TEST(Theorem1, MonotoneProperties) {
  CounterRng rng(8);
  for (int i = 0; i < 200; ++i) {
    const double sup = rng.uniform(), inf = sup * rng.uniform(), uy = rng.uniform(),
                 d = rng.uniform(), r = 0.01 + rng.uniform();
    const double bump = 0.01 + 0.1 * rng.uniform();
    const ExponentReport base = theorem1_bound(exact(sup, inf, uy, d), r);
    EXPECT_GE(theorem1_bound(exact(sup, inf, uy, d), r + bump).theta, base.theta);
    EXPECT_GE(theorem1_bound(exact(sup, inf, uy, d + bump), r).theta, base.theta);
    EXPECT_LE(theorem1_bound(exact(sup + bump, inf, uy, d), r).theta, base.theta);
    EXPECT_LE(base.penalty, 0.0);
    EXPECT_DOUBLE_EQ(base.theta, std::min(base.binning_term, base.decision_term));
  }
}

TEST(IidExponent, MatchesEntropyOracle) {
  const auto m = fixtures::dsbs();
  const TestChannel ch = TestChannel::bsc(0.25);
  const auto o = fixtures::per_symbol_oracle({0.45, 0.05, 0.05, 0.45}, {0.25, 0.25, 0.25, 0.25}, 2,
                                             2, fixtures::bsc_rows(0.25), 2);
  const IidQuantities q = iid_quantities(m, ch);
  EXPECT_NEAR(q.i_xu, o.i_xu, 1e-12);
  EXPECT_NEAR(q.i_uy, o.i_uy, 1e-12);
  EXPECT_NEAR(q.divergence, o.divergence, 1e-12);
  EXPECT_NEAR(q.i_xu, kIxu, 1e-12);
  EXPECT_NEAR(q.i_uy, kIuy, 1e-12);
  const ExponentReport r = iid_exponent(m, ch, 0.2);
  EXPECT_NEAR(r.theta, std::min(0.2 - (o.i_xu - o.i_uy), o.divergence), 1e-12);
  EXPECT_EQ(r.regime, Regime::DecisionLimited);
  EXPECT_EQ(r.penalty, 0.0);
}

TEST(IidExponent, SamePathAsTheorem1) {
  const auto m = fixtures::dsbs(0.2, 0.4);
  const TestChannel ch = TestChannel::bsc(0.1);
  const ExponentReport a = iid_exponent(m, ch, 0.3);
  const ExponentReport b = theorem1_bound(iid_spectral_inputs(m, ch), 0.3);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.binning_term, b.binning_term);
  EXPECT_EQ(iid_spectral_inputs(m, ch).provenance, Provenance::Exact);
}

TEST(IidExponent, TrivialModels) {
  const ExponentReport same = iid_exponent(fixtures::dsbs(0.1, 0.1), TestChannel::bsc(0.25), 0.2);
  EXPECT_EQ(same.decision_term, 0.0);
  EXPECT_LE(same.theta, 0.0);
  EXPECT_EQ(same.theta_clamped, 0.0);
  const ExponentReport useless = iid_exponent(fixtures::dsbs(), TestChannel::bsc(0.5), 0.2);
  EXPECT_NEAR(useless.theta, 0.0, 1e-15);
  EXPECT_NEAR(useless.binning_term, 0.2, 1e-15);
}

TEST(IidExponent, IndependentCouplingDivergenceEqualsMutualInformation) {
  CounterRng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nx = 2 + rng.below(3), ny = 2 + rng.below(3), nu = 2 + rng.below(3);
    std::vector<double> p0(nx * ny), w(nx * nu);
    double total = 0.0;
    for (double& v : p0) total += (v = 0.05 + rng.uniform());
    for (double& v : p0) v /= total;
    for (std::size_t x = 0; x < nx; ++x) {
      double row = 0.0;
      for (std::size_t u = 0; u < nu; ++u) row += (w[x * nu + u] = 0.05 + rng.uniform());
      for (std::size_t u = 0; u < nu; ++u) w[x * nu + u] /= row;
    }
    const JointPmf h0(nx, ny, p0);
    const auto p1 = fixtures::product(h0.marginal_x(), h0.marginal_y());
    const auto m = DiscreteJointSource::iid(h0, JointPmf(nx, ny, p1));
    const IidQuantities q = iid_quantities(m, TestChannel::discrete(nx, nu, w));
    EXPECT_NEAR(q.divergence, q.i_uy, 1e-12) << trial;
  }
}

TEST(IidExponent, Errors) {
  EXPECT_EQ(code_of([] { iid_quantities(fixtures::dsbs_markov(0.9, 0.1, 0.5), TestChannel::bsc(0.2)); }),
            ErrorCode::Unsupported);
  const std::size_t big = 1001;
  std::vector<double> uni(big * 1, 1.0 / big);
  const auto m = DiscreteJointSource::iid(JointPmf(big, 1, uni), JointPmf(big, 1, uni));
  std::vector<double> w(big * big, 1.0 / big);
  EXPECT_EQ(code_of([&] { iid_quantities(m, TestChannel::discrete(big, big, w)); }),
            ErrorCode::AlphabetTooLarge);
  EXPECT_EQ(code_of([] { iid_quantities(fixtures::dsbs(), TestChannel::gaussian(1.0)); }),
            ErrorCode::KindMismatch);
}

TEST(StationaryErgodic, Specialisations) {
  const ExponentReport r = stationary_ergodic_exponent(0.5 * std::log(2.9), 0.5 * std::log(1.1 / 0.29), 0.6);
  EXPECT_NEAR(r.binning_term, 0.6 - 0.5 * std::log(2.9), 1e-15);
  EXPECT_NEAR(r.binning_term, 0.0676, 5e-5);
  EXPECT_EQ(r.penalty, 0.0);
  EXPECT_DOUBLE_EQ(stationary_ergodic_exponent(0.0, 0.3, 0.25).binning_term, 0.25);
  EXPECT_EQ(stationary_ergodic_exponent(0.1, 0.0, 5.0).theta, 0.0);
}

TEST(GaussianExponent, ScalarClosedForms) {
  const std::size_t ns[] = {1, 2, 4};
  const GaussianExponent g = gaussian_exponent(scalar_source(0.9), 0.1, 0.6, ns);
  EXPECT_NEAR(g.entropy.values.back(), 0.5 * std::log(2.9), 1e-12);
  EXPECT_NEAR(g.divergence.values.back(),
              fixtures::gaussian_kl_2x2(1.1, 0.9, 1.0, 1.1, 0.0, 1.0), 1e-12);
  EXPECT_NEAR(g.report.binning_term, 0.0676, 5e-5);
  EXPECT_EQ(g.report.regime, Regime::BinningLimited);
  EXPECT_TRUE(g.converged);
}

TEST(GaussianExponent, EqualHypotheses) {
  const std::size_t ns[] = {2, 4};
  const GaussianExponent g = gaussian_exponent(scalar_source(0.5, 0.5), 0.3, 1.0, ns);
  EXPECT_NEAR(g.divergence.values.back(), 0.0, 1e-12);
  EXPECT_NEAR(g.report.theta, 0.0, 1e-12);
}

TEST(GaussianExponent, Ar1Converges) {
  GaussianJointSource s;
  s.acf_x = ar1_autocovariance(0.8, 1.0, 2048);
  s.acf_y = s.acf_x;
  s.ccf_h0 = {ar1_autocovariance(0.8, 0.5, 2048), {}};
  s.ccf_h1 = {{0.0}, {}};
  const std::size_t ns[] = {64, 128, 256, 512};
  const GaussianExponent g = gaussian_exponent(s, 0.5, 0.6, ns);
  EXPECT_LT(g.entropy.final_gap, 1e-3);
  EXPECT_LT(g.divergence.final_gap, 1e-3);
  EXPECT_TRUE(g.converged);
}

TEST(SweepRate, DsbsCrossover) {
  const SpectralInputs si = exact(kIxu, kIxu, kIuy, kIuy);
  std::vector<double> grid;
  for (int i = 0; i <= 25; ++i) grid.push_back(0.05 + 0.01 * i);
  const RateSweep s = sweep_rate(si, grid);
  EXPECT_NEAR(s.crossover, kIxu, 1e-15);
  for (const ExponentReport& r : s.reports) {
    EXPECT_EQ(r.regime, r.r < s.crossover ? Regime::BinningLimited : Regime::DecisionLimited);
  }
  for (std::size_t i = 1; i < s.reports.size(); ++i) {
    EXPECT_GE(s.reports[i].theta, s.reports[i - 1].theta);
  }
  EXPECT_EQ(s.reports.back().theta, s.reports[s.reports.size() - 2].theta);
}

TEST(SweepRate, ZeroDecisionTerm) {
  const double grid[] = {0.1, 0.2, 0.3};
  const RateSweep s = sweep_rate(exact(0.05, 0.05, 0.0, 0.0), grid);
  for (const ExponentReport& r : s.reports) {
    EXPECT_EQ(r.regime, Regime::DecisionLimited);
    EXPECT_EQ(r.theta, 0.0);
  }
}

TEST(SweepRate, RejectsUnsortedGrid) {
  const double grid[] = {0.2, 0.1};
  EXPECT_EQ(code_of([&] { sweep_rate(exact(0.1, 0.1, 0.0, 0.1), grid); }),
            ErrorCode::InvalidArgument);
}

TEST(OptimizeKappa, LargeRatePicksSmallestKappa) {
  const double grid[] = {0.05, 0.1, 0.5, 1.0};
  const KappaChoice c = optimize_kappa(scalar_source(0.9), 50.0, grid, 4);
  ASSERT_EQ(c.grid.size(), 4u);
  // The decision term decreases along this grid, so the smallest kappa wins.
  for (std::size_t i = 1; i < c.grid.size(); ++i) {
    EXPECT_LT(c.grid[i].report.decision_term, c.grid[i - 1].report.decision_term);
  }
  EXPECT_EQ(c.kappa, 0.05);
}

TEST(OptimizeKappa, AllInfeasibleAndSinglePoint) {
  const double grid[] = {0.01, 0.1};
  EXPECT_EQ(code_of([&] { optimize_kappa(scalar_source(0.9), 1e-4, grid, 2); }),
            ErrorCode::AllInfeasible);
  const double one[] = {0.3};
  EXPECT_EQ(optimize_kappa(scalar_source(0.9), 1.0, one, 2).kappa, 0.3);
}

TEST(OptimizeKappa, TiesGoToSmallerKappa) {
  // Equal hypotheses: every feasible kappa gives theta_clamped = 0.
  const double grid[] = {0.2, 0.4, 0.8};
  EXPECT_EQ(optimize_kappa(scalar_source(0.5, 0.5), 5.0, grid, 2).kappa, 0.2);
}

TEST(ProofParams, CopiesSpectralInputs) {
  const CodecParams p = proof_codec_params(exact(0.3, 0.2, 0.1, 0.05), 0.4);
  EXPECT_EQ(p.r0_lower, 0.2);
  EXPECT_EQ(p.r0_upper, 0.3);
  EXPECT_EQ(p.r_prime, 0.1);
  EXPECT_EQ(p.threshold, 0.05);
  EXPECT_EQ(p.epsilon, 0.02);
  CodecParams q = p;
  q.epsilon_t2 = 0.1;
  EXPECT_EQ(q.slack_t1(), 0.02);
  EXPECT_EQ(q.slack_t2(), 0.1);
  q.epsilon = 0.0;
  EXPECT_THROW(q.validate(), Error);
}
