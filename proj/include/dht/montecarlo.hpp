#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dht/codec_sim.hpp"
#include "dht/exponent_calc.hpp"

namespace dht {

/// Substream seed of one trial: derive_seed(master, kTrial, h << 63 | index).
/// Injective in (hypothesis, index) for indices below 2^63.
std::uint64_t derive_trial_seed(std::uint64_t master, Hypothesis h, std::uint64_t index) noexcept;

inline constexpr double kWilsonZ95 = 1.959963984540054;
inline constexpr std::size_t kMinTrialsForCi = 1000;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for `successes` out of `trials`, clamped so that it
/// always contains successes / trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ95);

struct EventCounts {
  std::uint64_t e11 = 0, e12 = 0, e21 = 0, e22 = 0;
  std::uint64_t& operator[](ErrorEvent e);
  std::uint64_t at(ErrorEvent e) const;
};

struct TrialDiagnostics {
  std::uint64_t encoder_failures = 0;  // no codeword in T1
  std::uint64_t chosen_not_in_t2 = 0;
  std::uint64_t chosen_not_in_an = 0;
};

struct SimulationResult {
  std::size_t n = 0;
  std::uint64_t trials_h0 = 0;
  std::uint64_t trials_h1 = 0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  Interval ci_alpha;
  Interval ci_beta;
  EventCounts events;
  std::uint64_t seed = 0;
  std::uint64_t m1 = 0;
  std::uint64_t m2 = 0;
  bool codebook_averaged = false;
  bool ci_reliable = false;  // trials >= kMinTrialsForCi
  TrialDiagnostics diagnostics[2];  // indexed by hypothesis
};

struct RunOptions {
  unsigned threads = 1;
  bool codebook_averaged = false;  // fresh codebook per trial
  std::uint64_t codebook_cap = kDefaultCodebookCap;
};

/// trials / 2 trials under H0, the rest under H1. One codebook per call,
/// seeded from (master_seed, n), unless codebook_averaged. Counts are
/// bit-identical for any thread count. Propagates CodebookTooLarge.
SimulationResult run_experiment(const CodecContext& ctx, const CodecParams& params, std::size_t n,
                                std::uint64_t trials, std::uint64_t master_seed,
                                const RunOptions& options = {});
SimulationResult run_experiment(const DiscreteJointSource& model, const TestChannel& channel,
                                const CodecParams& params, std::size_t n, std::uint64_t trials,
                                std::uint64_t master_seed, const RunOptions& options = {});

struct ExponentPoint {
  std::size_t n = 0;
  double exponent = 0.0;  // -(1/n) ln beta_hat
};

struct ExponentFit {
  std::vector<ExponentPoint> points;
  /// beta_hat = 0 cells: exponent is only bounded below by (1/n) ln trials_h1.
  std::vector<ExponentPoint> zero_error_bounds;
  double slope_estimate = 0.0;  // n-weighted mean of points
  std::optional<double> theoretical_theta;
};

/// Needs at least three blocklengths. Throws AllZeroErrors when every
/// beta_hat is zero.
ExponentFit fit_exponent(std::span<const SimulationResult> results,
                         std::optional<double> theoretical_theta = std::nullopt);

void write_simulation_csv_header(std::ostream& os);
void write_simulation_csv_row(std::ostream& os, const SimulationResult& r);

}  // namespace dht
