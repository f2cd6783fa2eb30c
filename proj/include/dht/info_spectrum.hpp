#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "dht/source_models.hpp"

namespace dht {

enum class DensityKind { XuInfo, UyInfo, UyDivergence };
const char* to_string(DensityKind kind) noexcept;

/// Normalised log-likelihood ratio of one sequence pair, in nats/symbol.
/// Non-finite values mark zero-probability events.
struct DensitySample {
  std::size_t n = 0;
  double value = 0.0;
  DensityKind kind = DensityKind::XuInfo;
};

/// (1/n)(num - den) with the sentinel conventions used throughout:
/// -inf over finite is -inf, finite over -inf is +inf, -inf over -inf is NaN.
double normalized_log_ratio(double log_num, double log_den, std::size_t n) noexcept;

/// (1/n) log P(u|x) / P_U(u).
DensitySample info_density_xu(const DiscreteJointSource& model, const TestChannel& channel,
                              SymbolSpan x, SymbolSpan u);
/// (1/n) log P_h(u|y) / P_U(u).
DensitySample info_density_uy(const DiscreteJointSource& model, const TestChannel& channel,
                              SymbolSpan u, SymbolSpan y, Hypothesis h = Hypothesis::H0);
/// (1/n) log P_H0(u, y) / P_H1(u, y).
DensitySample divergence_density(const DiscreteJointSource& model, const TestChannel& channel,
                                 SymbolSpan u, SymbolSpan y);

// ---------------------------------------------------------------------------

/// Draws one density value at blocklength n.
using DensitySampler = std::function<double(std::size_t n, CounterRng& rng)>;

/// Samplers draw (x, y) under `sampling`, pass x through the channel and
/// evaluate the density.
DensitySampler xu_density_sampler(const DiscreteJointSource& model, const TestChannel& channel,
                                  Hypothesis sampling = Hypothesis::H0);
DensitySampler uy_density_sampler(const DiscreteJointSource& model, const TestChannel& channel,
                                  Hypothesis sampling = Hypothesis::H0);
DensitySampler divergence_density_sampler(const DiscreteJointSource& model,
                                          const TestChannel& channel,
                                          Hypothesis sampling = Hypothesis::H0);

struct DensityBatch {
  std::size_t n = 0;
  std::vector<double> values;  // one per trial, in trial order
};

struct DensitySamples {
  std::uint64_t seed = 0;
  std::vector<DensityBatch> per_n;
};

/// Trial t at blocklength n uses the substream
/// derive_seed(derive_seed(seed, kSpectrum, n), kSpectrum, t), so the batch
/// is independent of the thread count.
DensitySamples sample_densities(const DensitySampler& sampler,
                                std::span<const std::size_t> n_list, std::size_t trials,
                                std::uint64_t seed, std::size_t threads = 1);

enum class SpectralKind { PLimInf, PLimSup };
const char* to_string(SpectralKind kind) noexcept;

struct SpectralOptions {
  double epsilon = 0.05;
  /// Convergence tolerance on the last two per-n values, nats/symbol.
  double tolerance = 0.02;
  std::size_t threads = 1;
};

struct SpectralPoint {
  std::size_t n = 0;
  double lower_quantile = 0.0;  // epsilon-quantile of the finite samples
  double upper_quantile = 0.0;  // (1 - epsilon)-quantile
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t finite = 0;
  std::size_t nonfinite = 0;
};

struct SpectralEstimate {
  SpectralKind kind = SpectralKind::PLimSup;
  double epsilon = 0.05;
  std::vector<SpectralPoint> per_n;  // sorted by n
  double extrapolated = 0.0;         // value at the largest n
  bool converged = false;
  bool excess_nonfinite = false;

  /// The kind-selected quantile at per_n[i].
  double value_at(std::size_t i) const;
};

/// Linear-interpolation (type 7) quantile of sorted data.
double sorted_quantile(std::span<const double> sorted, double q);

SpectralEstimate estimate_from_samples(SpectralKind kind, const DensitySamples& samples,
                                       const SpectralOptions& options = {});

/// Throws TooFewTrials for trials < 100 and InvalidArgument for a bad
/// n_list or epsilon outside (0, 0.5).
SpectralEstimate estimate_spectral(SpectralKind kind, const DensitySampler& sampler,
                                   std::span<const std::size_t> n_list, std::size_t trials,
                                   std::uint64_t seed, const SpectralOptions& options = {});

/// CSV rows "kind,n,trial,value" (with header) for external plotting.
void write_density_csv(std::ostream& os, DensityKind kind, const DensitySamples& samples);

}  // namespace dht
