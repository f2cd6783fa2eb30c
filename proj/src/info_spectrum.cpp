#include "dht/info_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "dht/errors.hpp"
#include "dht/format.hpp"

namespace dht {

const char* to_string(DensityKind kind) noexcept {
  switch (kind) {
    case DensityKind::XuInfo: return "XU_info";
    case DensityKind::UyInfo: return "UY_info";
    case DensityKind::UyDivergence: return "UY_divergence";
  }
  return "unknown";
}

const char* to_string(SpectralKind kind) noexcept {
  return kind == SpectralKind::PLimInf ? "p_liminf" : "p_limsup";
}

double normalized_log_ratio(double log_num, double log_den, std::size_t n) noexcept {
  if (log_den == kNegInf) {
    return log_num == kNegInf ? std::numeric_limits<double>::quiet_NaN() : kPosInf;
  }
  if (log_num == kNegInf) return kNegInf;
  return (log_num - log_den) / static_cast<double>(n);
}

DensitySample info_density_xu(const DiscreteJointSource& model, const TestChannel& channel,
                              SymbolSpan x, SymbolSpan u) {
  const double num = log_channel_prob(channel, x, u);
  const double den = log_marginal_u(model, channel, u);
  return {u.size(), normalized_log_ratio(num, den, u.size()), DensityKind::XuInfo};
}

DensitySample info_density_uy(const DiscreteJointSource& model, const TestChannel& channel,
                              SymbolSpan u, SymbolSpan y, Hypothesis h) {
  const double num = log_cond_u_given_y(model, channel, u, y, h);
  const double den = log_marginal_u(model, channel, u, h);
  return {u.size(), normalized_log_ratio(num, den, u.size()), DensityKind::UyInfo};
}

DensitySample divergence_density(const DiscreteJointSource& model, const TestChannel& channel,
                                 SymbolSpan u, SymbolSpan y) {
  const double num = log_joint_uy(model, channel, u, y, Hypothesis::H0);
  const double den = log_joint_uy(model, channel, u, y, Hypothesis::H1);
  return {u.size(), normalized_log_ratio(num, den, u.size()), DensityKind::UyDivergence};
}

// ---------------------------------------------------------------------------

DensitySampler xu_density_sampler(const DiscreteJointSource& model, const TestChannel& channel,
                                  Hypothesis sampling) {
  channel.require_discrete(model.nx());
  return [model, channel, sampling](std::size_t n, CounterRng& rng) {
    const SamplePair p = sample_block(model, sampling, n, rng);
    const Sequence u = apply_test_channel(channel, p.x, rng);
    return info_density_xu(model, channel, p.x, u).value;
  };
}

DensitySampler uy_density_sampler(const DiscreteJointSource& model, const TestChannel& channel,
                                  Hypothesis sampling) {
  channel.require_discrete(model.nx());
  return [model, channel, sampling](std::size_t n, CounterRng& rng) {
    const SamplePair p = sample_block(model, sampling, n, rng);
    const Sequence u = apply_test_channel(channel, p.x, rng);
    return info_density_uy(model, channel, u, p.y, Hypothesis::H0).value;
  };
}

DensitySampler divergence_density_sampler(const DiscreteJointSource& model,
                                          const TestChannel& channel, Hypothesis sampling) {
  channel.require_discrete(model.nx());
  return [model, channel, sampling](std::size_t n, CounterRng& rng) {
    const SamplePair p = sample_block(model, sampling, n, rng);
    const Sequence u = apply_test_channel(channel, p.x, rng);
    return divergence_density(model, channel, u, p.y).value;
  };
}

namespace {

void check_n_list(std::span<const std::size_t> n_list) {
  if (n_list.empty()) fail(ErrorCode::InvalidArgument, "n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0) fail(ErrorCode::InvalidArgument, "blocklengths must be positive");
    if (i > 0 && n_list[i] <= n_list[i - 1]) {
      fail(ErrorCode::InvalidArgument, "n_list must be strictly increasing");
    }
  }
}

}  // namespace

DensitySamples sample_densities(const DensitySampler& sampler,
                                std::span<const std::size_t> n_list, std::size_t trials,
                                std::uint64_t seed, std::size_t threads) {
  check_n_list(n_list);
  DensitySamples out;
  out.seed = seed;
  threads = std::max<std::size_t>(1, std::min(threads, trials));
  for (std::size_t n : n_list) {
    DensityBatch batch{n, std::vector<double>(trials)};
    const std::uint64_t n_seed = derive_seed(seed, seed_domain::kSpectrum, n);
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        CounterRng rng(derive_seed(n_seed, seed_domain::kSpectrum, t));
        batch.values[t] = sampler(n, rng);
      }
    };
    if (threads == 1) {
      work(0, trials);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (trials + threads - 1) / threads;
      for (std::size_t begin = 0; begin < trials; begin += chunk) {
        pool.emplace_back(work, begin, std::min(trials, begin + chunk));
      }
    }
    out.per_n.push_back(std::move(batch));
  }
  return out;
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double SpectralEstimate::value_at(std::size_t i) const {
  return kind == SpectralKind::PLimInf ? per_n.at(i).lower_quantile
                                       : per_n.at(i).upper_quantile;
}

SpectralEstimate estimate_from_samples(SpectralKind kind, const DensitySamples& samples,
                                       const SpectralOptions& options) {
  if (!(options.epsilon > 0.0 && options.epsilon < 0.5)) {
    fail(ErrorCode::InvalidArgument, "epsilon must lie in (0, 0.5)");
  }
  SpectralEstimate est;
  est.kind = kind;
  est.epsilon = options.epsilon;
  for (const DensityBatch& batch : samples.per_n) {
    std::vector<double> finite;
    finite.reserve(batch.values.size());
    for (double v : batch.values) {
      if (std::isfinite(v)) finite.push_back(v);
    }
    std::sort(finite.begin(), finite.end());
    SpectralPoint pt;
    pt.n = batch.n;
    pt.finite = finite.size();
    pt.nonfinite = batch.values.size() - finite.size();
    pt.lower_quantile = sorted_quantile(finite, options.epsilon);
    pt.upper_quantile = sorted_quantile(finite, 1.0 - options.epsilon);
    if (!finite.empty()) {
      double sum = 0.0;
      for (double v : finite) sum += v;
      pt.mean = sum / static_cast<double>(finite.size());
      double ss = 0.0;
      for (double v : finite) ss += (v - pt.mean) * (v - pt.mean);
      pt.stddev = finite.size() > 1 ? std::sqrt(ss / static_cast<double>(finite.size() - 1)) : 0.0;
    }
    if (static_cast<double>(pt.nonfinite) >
        options.epsilon * static_cast<double>(batch.values.size())) {
      est.excess_nonfinite = true;
    }
    est.per_n.push_back(pt);
  }
  std::sort(est.per_n.begin(), est.per_n.end(),
            [](const SpectralPoint& a, const SpectralPoint& b) { return a.n < b.n; });
  if (!est.per_n.empty()) {
    const std::size_t last = est.per_n.size() - 1;
    est.extrapolated = est.value_at(last);
    est.converged = last > 0 &&
                    std::abs(est.value_at(last) - est.value_at(last - 1)) < options.tolerance;
    if (est.excess_nonfinite) est.converged = false;
  }
  return est;
}

SpectralEstimate estimate_spectral(SpectralKind kind, const DensitySampler& sampler,
                                   std::span<const std::size_t> n_list, std::size_t trials,
                                   std::uint64_t seed, const SpectralOptions& options) {
  if (trials < 100) fail(ErrorCode::TooFewTrials, "estimate_spectral needs at least 100 trials");
  if (!(options.epsilon > 0.0 && options.epsilon < 0.5)) {
    fail(ErrorCode::InvalidArgument, "epsilon must lie in (0, 0.5)");
  }
  check_n_list(n_list);
  const DensitySamples samples = sample_densities(sampler, n_list, trials, seed, options.threads);
  return estimate_from_samples(kind, samples, options);
}

void write_density_csv(std::ostream& os, DensityKind kind, const DensitySamples& samples) {
  os << "kind,n,trial,value\n";
  for (const DensityBatch& batch : samples.per_n) {
    for (std::size_t t = 0; t < batch.values.size(); ++t) {
      os << to_string(kind) << ',' << batch.n << ',' << t << ',' << format_double(batch.values[t])
         << '\n';
    }
  }
}

}  // namespace dht
