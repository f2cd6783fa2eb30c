#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dht/gaussian_tools.hpp"
#include "dht/info_spectrum.hpp"
#include "dht/source_models.hpp"

namespace dht {

enum class Provenance { Exact, Estimated };
const char* to_string(Provenance p) noexcept;

/// The four spectral quantities entering the achievable exponent, in
/// nats/symbol. Estimated inputs keep the estimates they came from.
struct SpectralInputs {
  double i_sup_xu = 0.0;
  double i_inf_xu = 0.0;
  double i_inf_uy = 0.0;
  double d_inf = 0.0;
  Provenance provenance = Provenance::Exact;
  std::vector<SpectralEstimate> estimates;

  /// Throws InvalidArgument unless all finite and i_inf_xu <= i_sup_xu.
  void validate() const;
};

enum class Regime { BinningLimited, DecisionLimited, Infeasible };
const char* to_string(Regime r) noexcept;

struct ExponentReport {
  double r = 0.0;
  double binning_term = 0.0;
  double decision_term = 0.0;
  double penalty = 0.0;  // i_inf_xu - i_sup_xu, never positive
  double theta = 0.0;    // min(binning_term, decision_term), may be negative
  double theta_clamped = 0.0;
  bool feasible = false;  // binning_term > 0
  Regime regime = Regime::Infeasible;
};

/// Quantize-and-binning parameters, all nats/symbol. A single slack applies
/// to T1, T2 and A_n unless overridden per set.
struct CodecParams {
  double r = 0.0;
  double r0_lower = 0.0;
  double r0_upper = 0.0;
  double r_prime = 0.0;
  double threshold = 0.0;  // S
  double epsilon = 0.02;
  std::optional<double> epsilon_t1;
  std::optional<double> epsilon_t2;
  std::optional<double> epsilon_an;

  double slack_t1() const noexcept { return epsilon_t1.value_or(epsilon); }
  double slack_t2() const noexcept { return epsilon_t2.value_or(epsilon); }
  double slack_an() const noexcept { return epsilon_an.value_or(epsilon); }
  /// Throws InvalidArgument unless r >= 0, r0_lower <= r0_upper and every
  /// slack is positive.
  void validate() const;
};

/// r0_lower = I_inf(X;U), r0_upper = I_sup(X;U), r' = I_inf(U;Y), S = D_inf.
CodecParams proof_codec_params(const SpectralInputs& si, double r, double epsilon = 0.02);

/// binning = r - (I_sup_xu - I_inf_uy); decision = D_inf + (I_inf_xu - I_sup_xu).
/// Ties between the two terms are labelled DecisionLimited.
ExponentReport theorem1_bound(const SpectralInputs& si, double r);

/// Exact per-symbol quantities of an IID model by enumeration.
struct IidQuantities {
  double i_xu = 0.0;
  double i_uy = 0.0;
  double divergence = 0.0;  // D(P_UY || P_UY-bar)
};

inline constexpr std::size_t kMaxEnumerationCells = 1'000'000;

/// Throws AlphabetTooLarge when |X| |U| |Y| exceeds kMaxEnumerationCells and
/// Unsupported for non-IID memory.
IidQuantities iid_quantities(const DiscreteJointSource& model, const TestChannel& channel);
SpectralInputs iid_spectral_inputs(const DiscreteJointSource& model, const TestChannel& channel);
ExponentReport iid_exponent(const DiscreteJointSource& model, const TestChannel& channel,
                            double r);

/// Spectral inputs for sources with memory, from finite-n quantile estimates.
SpectralInputs estimated_spectral_inputs(const DiscreteJointSource& model,
                                         const TestChannel& channel,
                                         std::span<const std::size_t> n_list,
                                         std::size_t trials, std::uint64_t seed,
                                         const SpectralOptions& options = {});

/// Stationary ergodic case: no penalty, binning = r - entropy_diff,
/// decision = div_rate.
ExponentReport stationary_ergodic_exponent(double entropy_diff, double div_rate, double r);

struct GaussianExponent {
  double kappa = 0.0;
  ExponentReport report;
  LimitTrace entropy;
  LimitTrace divergence;
  bool converged = false;
  std::vector<std::string> warnings;
};

GaussianExponent gaussian_exponent(const GaussianJointSource& src, double kappa, double r,
                                   std::span<const std::size_t> n_list,
                                   double tolerance = 1e-3);

struct RateSweep {
  std::vector<ExponentReport> reports;
  /// r* = I_sup_xu - I_inf_uy + decision_term, where binning meets decision.
  double crossover = 0.0;
};

RateSweep sweep_rate(const SpectralInputs& si, std::span<const double> r_grid);

struct KappaChoice {
  double kappa = 0.0;
  GaussianExponent result;
  std::vector<GaussianExponent> grid;  // one entry per grid point, in order
};

/// Maximises theta_clamped over feasible grid points; ties go to the smaller
/// kappa. Throws AllInfeasible when no grid point is feasible.
KappaChoice optimize_kappa(const GaussianJointSource& src, double r,
                           std::span<const double> kappa_grid, std::size_t n);

}  // namespace dht
