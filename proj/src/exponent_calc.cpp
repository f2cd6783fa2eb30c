#include "dht/exponent_calc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dht/errors.hpp"

namespace dht {

const char* to_string(Provenance p) noexcept {
  return p == Provenance::Exact ? "Exact" : "Estimated";
}

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::BinningLimited: return "BinningLimited";
    case Regime::DecisionLimited: return "DecisionLimited";
    case Regime::Infeasible: return "Infeasible";
  }
  return "unknown";
}

void SpectralInputs::validate() const {
  for (double v : {i_sup_xu, i_inf_xu, i_inf_uy, d_inf}) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "spectral inputs must be finite");
  }
  if (i_inf_xu > i_sup_xu) {
    fail(ErrorCode::InvalidArgument, "I_inf(X;U) exceeds I_sup(X;U)");
  }
}

void CodecParams::validate() const {
  if (!(r >= 0.0)) fail(ErrorCode::InvalidArgument, "rate must be nonnegative");
  if (!(r0_lower <= r0_upper)) fail(ErrorCode::InvalidArgument, "r0_lower exceeds r0_upper");
  if (!std::isfinite(r0_upper)) fail(ErrorCode::InvalidArgument, "r0_upper must be finite");
  for (double e : {slack_t1(), slack_t2(), slack_an()}) {
    if (!(e > 0.0)) fail(ErrorCode::InvalidArgument, "slack epsilon must be positive");
  }
}

CodecParams proof_codec_params(const SpectralInputs& si, double r, double epsilon) {
  CodecParams p;
  p.r = r;
  p.r0_lower = si.i_inf_xu;
  p.r0_upper = si.i_sup_xu;
  p.r_prime = si.i_inf_uy;
  p.threshold = si.d_inf;
  p.epsilon = epsilon;
  return p;
}

ExponentReport theorem1_bound(const SpectralInputs& si, double r) {
  si.validate();
  if (!(r > 0.0)) fail(ErrorCode::InvalidArgument, "rate must be positive");
  ExponentReport rep;
  rep.r = r;
  rep.binning_term = r - (si.i_sup_xu - si.i_inf_uy);
  rep.penalty = si.i_inf_xu - si.i_sup_xu;
  rep.decision_term = si.d_inf + rep.penalty;
  rep.theta = std::min(rep.binning_term, rep.decision_term);
  rep.theta_clamped = std::max(rep.theta, 0.0);
  rep.feasible = rep.binning_term > 0.0;
  if (!rep.feasible) {
    rep.regime = Regime::Infeasible;
  } else if (rep.binning_term < rep.decision_term) {
    rep.regime = Regime::BinningLimited;
  } else {
    rep.regime = Regime::DecisionLimited;
  }
  return rep;
}

IidQuantities iid_quantities(const DiscreteJointSource& model, const TestChannel& channel) {
  if (model.memory() != Memory::Iid) {
    fail(ErrorCode::Unsupported, "exact enumeration needs IID memory");
  }
  channel.require_discrete(model.nx());
  const std::size_t nx = model.nx(), ny = model.ny(), nu = channel.nu();
  if (nx * nu * ny > kMaxEnumerationCells) {
    std::ostringstream os;
    os << "|X||U||Y| = " << nx * nu * ny << " exceeds " << kMaxEnumerationCells;
    fail(ErrorCode::AlphabetTooLarge, os.str());
  }
  const JointPmf& p0 = model.step_pmf(Hypothesis::H0);
  const JointPmf& p1 = model.step_pmf(Hypothesis::H1);
  const std::vector<double> px = p0.marginal_x();
  const std::vector<double> py = p0.marginal_y();

  // P(u, y) under each hypothesis, and P(u).
  std::vector<double> puy0(nu * ny, 0.0), puy1(nu * ny, 0.0), pu(nu, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t u = 0; u < nu; ++u) {
      const double w = channel.prob(u, x);
      pu[u] += px[x] * w;
      for (std::size_t y = 0; y < ny; ++y) {
        puy0[u * ny + y] += w * p0(x, y);
        puy1[u * ny + y] += w * p1(x, y);
      }
    }
  }

  IidQuantities q;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t u = 0; u < nu; ++u) {
      const double joint = px[x] * channel.prob(u, x);
      if (joint > 0.0) q.i_xu += joint * std::log(channel.prob(u, x) / pu[u]);
    }
  }
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double a = puy0[u * ny + y];
      if (a <= 0.0) continue;
      q.i_uy += a * std::log(a / (pu[u] * py[y]));
      const double b = puy1[u * ny + y];
      q.divergence += b > 0.0 ? a * std::log(a / b) : kPosInf;
    }
  }
  return q;
}

SpectralInputs iid_spectral_inputs(const DiscreteJointSource& model, const TestChannel& channel) {
  const IidQuantities q = iid_quantities(model, channel);
  SpectralInputs si;
  si.i_sup_xu = q.i_xu;
  si.i_inf_xu = q.i_xu;
  si.i_inf_uy = q.i_uy;
  si.d_inf = q.divergence;
  si.provenance = Provenance::Exact;
  return si;
}

ExponentReport iid_exponent(const DiscreteJointSource& model, const TestChannel& channel,
                            double r) {
  return theorem1_bound(iid_spectral_inputs(model, channel), r);
}

SpectralInputs estimated_spectral_inputs(const DiscreteJointSource& model,
                                         const TestChannel& channel,
                                         std::span<const std::size_t> n_list,
                                         std::size_t trials, std::uint64_t seed,
                                         const SpectralOptions& options) {
  const DensitySamples xu = sample_densities(xu_density_sampler(model, channel), n_list, trials,
                                             derive_seed(seed, seed_domain::kSpectrum, 0),
                                             options.threads);
  const DensitySamples uy = sample_densities(uy_density_sampler(model, channel), n_list, trials,
                                             derive_seed(seed, seed_domain::kSpectrum, 1),
                                             options.threads);
  const DensitySamples dv =
      sample_densities(divergence_density_sampler(model, channel), n_list, trials,
                       derive_seed(seed, seed_domain::kSpectrum, 2), options.threads);
  SpectralInputs si;
  si.provenance = Provenance::Estimated;
  si.estimates.push_back(estimate_from_samples(SpectralKind::PLimSup, xu, options));
  si.estimates.push_back(estimate_from_samples(SpectralKind::PLimInf, xu, options));
  si.estimates.push_back(estimate_from_samples(SpectralKind::PLimInf, uy, options));
  si.estimates.push_back(estimate_from_samples(SpectralKind::PLimInf, dv, options));
  si.i_sup_xu = si.estimates[0].extrapolated;
  si.i_inf_xu = si.estimates[1].extrapolated;
  si.i_inf_uy = si.estimates[2].extrapolated;
  si.d_inf = si.estimates[3].extrapolated;
  return si;
}

ExponentReport stationary_ergodic_exponent(double entropy_diff, double div_rate, double r) {
  SpectralInputs si;
  // With I_sup = I_inf the binning gap is carried entirely by entropy_diff.
  si.i_sup_xu = entropy_diff;
  si.i_inf_xu = entropy_diff;
  si.i_inf_uy = 0.0;
  si.d_inf = div_rate;
  return theorem1_bound(si, r);
}

GaussianExponent gaussian_exponent(const GaussianJointSource& src, double kappa, double r,
                                   std::span<const std::size_t> n_list, double tolerance) {
  if (!(kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa must be positive");
  if (n_list.empty()) fail(ErrorCode::InvalidArgument, "n_list is empty");
  GaussianExponent out;
  out.kappa = kappa;
  out.warnings = validate_gaussian_source(src, n_list.back());
  out.entropy = limit_sequence(
      [&](std::size_t n) {
        const ConditionalCov cc = conditional_cov(joint_cov(src, n, Hypothesis::H0));
        const Vector& ev = cc.eigenvalues;
        return entropy_rate_diff_term(std::span<const double>(ev.data(), ev.size()), kappa);
      },
      n_list, tolerance);
  out.divergence = limit_sequence(
      [&](std::size_t n) {
        const UyCov uy = uy_cov(joint_cov(src, n, Hypothesis::H0),
                                joint_cov(src, n, Hypothesis::H1), kappa);
        return gauss_divergence_term(uy, uy_mean_difference(src, n));
      },
      n_list, tolerance);
  out.converged = out.entropy.converged && out.divergence.converged;
  out.report = stationary_ergodic_exponent(out.entropy.values.back(),
                                           out.divergence.values.back(), r);
  return out;
}

RateSweep sweep_rate(const SpectralInputs& si, std::span<const double> r_grid) {
  RateSweep sweep;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) {
      fail(ErrorCode::InvalidArgument, "rate grid must be increasing");
    }
    sweep.reports.push_back(theorem1_bound(si, r_grid[i]));
  }
  const double decision = si.d_inf + (si.i_inf_xu - si.i_sup_xu);
  sweep.crossover = si.i_sup_xu - si.i_inf_uy + decision;
  return sweep;
}

KappaChoice optimize_kappa(const GaussianJointSource& src, double r,
                           std::span<const double> kappa_grid, std::size_t n) {
  if (kappa_grid.empty()) fail(ErrorCode::InvalidArgument, "kappa grid is empty");
  KappaChoice choice;
  const std::size_t n_list[] = {n};
  std::optional<std::size_t> best;
  for (double kappa : kappa_grid) {
    if (!(kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa grid must be positive");
    choice.grid.push_back(gaussian_exponent(src, kappa, r, n_list));
    const GaussianExponent& cand = choice.grid.back();
    if (!cand.report.feasible) continue;
    if (!best) {
      best = choice.grid.size() - 1;
      continue;
    }
    const GaussianExponent& cur = choice.grid[*best];
    const double a = cand.report.theta_clamped, b = cur.report.theta_clamped;
    if (a > b || (a == b && cand.kappa < cur.kappa)) best = choice.grid.size() - 1;
  }
  if (!best) fail(ErrorCode::AllInfeasible, "no kappa in the grid gives a feasible exponent");
  choice.kappa = choice.grid[*best].kappa;
  choice.result = choice.grid[*best];
  return choice;
}

}  // namespace dht
