#include "dht/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "dht/errors.hpp"
#include "dht/format.hpp"

namespace dht {

std::uint64_t derive_trial_seed(std::uint64_t master, Hypothesis h, std::uint64_t index) noexcept {
  const std::uint64_t tag = static_cast<std::uint64_t>(index_of(h)) << 63;
  return derive_seed(master, seed_domain::kTrial, tag | (index & ~(std::uint64_t{1} << 63)));
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

std::uint64_t& EventCounts::operator[](ErrorEvent e) {
  switch (e) {
    case ErrorEvent::E11: return e11;
    case ErrorEvent::E12: return e12;
    case ErrorEvent::E21: return e21;
    case ErrorEvent::E22: return e22;
    case ErrorEvent::Correct: break;
  }
  fail(ErrorCode::InvalidArgument, "Correct is not an error event");
}

std::uint64_t EventCounts::at(ErrorEvent e) const {
  return const_cast<EventCounts&>(*this)[e];
}

namespace {

struct Tally {
  EventCounts events;
  TrialDiagnostics diag[2];

  void add(const TrialTrace& t) {
    const std::size_t h = index_of(t.hypothesis);
    if (t.event != ErrorEvent::Correct) ++events[t.event];
    if (!t.sent) {
      ++diag[h].encoder_failures;
    } else {
      diag[h].chosen_not_in_t2 += t.chosen_in_t2 ? 0 : 1;
      diag[h].chosen_not_in_an += t.chosen_in_an ? 0 : 1;
    }
  }
  void merge(const Tally& o) {
    events.e11 += o.events.e11;
    events.e12 += o.events.e12;
    events.e21 += o.events.e21;
    events.e22 += o.events.e22;
    for (std::size_t h = 0; h < 2; ++h) {
      diag[h].encoder_failures += o.diag[h].encoder_failures;
      diag[h].chosen_not_in_t2 += o.diag[h].chosen_not_in_t2;
      diag[h].chosen_not_in_an += o.diag[h].chosen_not_in_an;
    }
  }
};

}  // namespace

SimulationResult run_experiment(const CodecContext& ctx, const CodecParams& params, std::size_t n,
                                std::uint64_t trials, std::uint64_t master_seed,
                                const RunOptions& options) {
  if (trials < 2) fail(ErrorCode::InvalidArgument, "need at least one trial per hypothesis");
  SimulationResult res;
  res.n = n;
  res.seed = master_seed;
  res.trials_h0 = trials / 2;
  res.trials_h1 = trials - res.trials_h0;
  res.codebook_averaged = options.codebook_averaged;
  res.ci_reliable = trials >= kMinTrialsForCi;

  std::optional<Codebook> shared;
  if (!options.codebook_averaged) {
    shared = build_codebook(ctx, n, params, derive_seed(master_seed, seed_domain::kCodebook, n),
                            options.codebook_cap);
    res.m1 = shared->m1;
    res.m2 = shared->m2;
  } else {
    // Sizes and the cap check, without keeping the book.
    res.m1 = codebook_size(params.r0_upper + params.slack_t1(), n);
    res.m2 = codebook_size(params.r, n);
    if (res.m1 > options.codebook_cap) {
      fail(ErrorCode::CodebookTooLarge, "codebook needs more codewords than the cap allows");
    }
  }

  // Work item k < trials_h0 is H0 trial k, the rest are H1 trials.
  auto run_one = [&](std::uint64_t k, Tally& tally) {
    const Hypothesis h = k < res.trials_h0 ? Hypothesis::H0 : Hypothesis::H1;
    const std::uint64_t idx = k < res.trials_h0 ? k : k - res.trials_h0;
    const std::uint64_t trial_seed = derive_trial_seed(master_seed, h, idx);
    CounterRng rng(trial_seed);
    if (shared) {
      tally.add(run_trial(*shared, ctx, params, h, rng));
    } else {
      const Codebook cb = build_codebook(
          ctx, n, params, derive_seed(trial_seed, seed_domain::kCodebook, 0), options.codebook_cap);
      tally.add(run_trial(cb, ctx, params, h, rng));
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::clamp<std::uint64_t>(options.threads, 1, trials));
  std::vector<Tally> tallies(threads);
  if (threads == 1) {
    for (std::uint64_t k = 0; k < trials; ++k) run_one(k, tallies[0]);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::uint64_t k = w; k < trials; k += threads) run_one(k, tallies[w]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  Tally total;
  for (const Tally& t : tallies) total.merge(t);

  res.events = total.events;
  res.diagnostics[0] = total.diag[0];
  res.diagnostics[1] = total.diag[1];
  const std::uint64_t type1 = res.events.e11 + res.events.e12;
  const std::uint64_t type2 = res.events.e21 + res.events.e22;
  res.alpha_hat = static_cast<double>(type1) / static_cast<double>(res.trials_h0);
  res.beta_hat = static_cast<double>(type2) / static_cast<double>(res.trials_h1);
  res.ci_alpha = wilson_interval(type1, res.trials_h0);
  res.ci_beta = wilson_interval(type2, res.trials_h1);
  return res;
}

SimulationResult run_experiment(const DiscreteJointSource& model, const TestChannel& channel,
                                const CodecParams& params, std::size_t n, std::uint64_t trials,
                                std::uint64_t master_seed, const RunOptions& options) {
  return run_experiment(CodecContext(model, channel), params, n, trials, master_seed, options);
}

ExponentFit fit_exponent(std::span<const SimulationResult> results,
                         std::optional<double> theoretical_theta) {
  if (results.size() < 3) fail(ErrorCode::InvalidArgument, "need at least three blocklengths");
  ExponentFit fit;
  fit.theoretical_theta = theoretical_theta;
  double num = 0.0, den = 0.0;
  for (const SimulationResult& r : results) {
    if (r.n == 0) fail(ErrorCode::InvalidArgument, "blocklength must be positive");
    const double n = static_cast<double>(r.n);
    if (r.beta_hat > 0.0) {
      const double e = -std::log(r.beta_hat) / n;
      fit.points.push_back({r.n, e});
      num += n * e;
      den += n;
    } else {
      fit.zero_error_bounds.push_back(
          {r.n, std::log(static_cast<double>(std::max<std::uint64_t>(r.trials_h1, 1))) / n});
    }
  }
  if (fit.points.empty()) fail(ErrorCode::AllZeroErrors, "every beta_hat is zero");
  fit.slope_estimate = num / den;
  return fit;
}

void write_simulation_csv_header(std::ostream& os) {
  os << "n,trials_h0,trials_h1,alpha_hat,alpha_lo,alpha_hi,beta_hat,beta_lo,beta_hi,"
        "e11,e12,e21,e22,seed\n";
}

void write_simulation_csv_row(std::ostream& os, const SimulationResult& r) {
  os << r.n << ',' << r.trials_h0 << ',' << r.trials_h1 << ',' << format_double(r.alpha_hat)
     << ',' << format_double(r.ci_alpha.lo) << ',' << format_double(r.ci_alpha.hi) << ','
     << format_double(r.beta_hat) << ',' << format_double(r.ci_beta.lo) << ','
     << format_double(r.ci_beta.hi) << ',' << r.events.e11 << ',' << r.events.e12 << ','
     << r.events.e21 << ',' << r.events.e22 << ',' << r.seed << '\n';
}

}  // namespace dht
