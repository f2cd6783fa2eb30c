#include "dht/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "dht/errors.hpp"
#include "dht/exponent_calc.hpp"
#include "dht/format.hpp"
#include "dht/info_spectrum.hpp"
#include "dht/model_io.hpp"
#include "dht/montecarlo.hpp"

namespace dht::cli {

using nlohmann::json;

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Options {
  std::string mode;
  std::string model_path;
  double rate = 0.0;
  bool has_rate = false;
  double kappa = 0.0;
  bool has_kappa = false;
  std::vector<std::size_t> n_list;
  std::uint64_t trials = 0;
  bool has_trials = false;
  std::uint64_t seed = 1;
  double epsilon = 0.0;
  bool has_epsilon = false;
  std::string threshold = "auto";
  std::string out_path;
  std::string summary_path;
  unsigned threads = 0;
  bool dry_run = false;
  bool bits = false;
  // sweep
  std::string axis = "rate";
  std::string grid;
  // simulate
  std::uint64_t cap = kDefaultCodebookCap;
  bool codebook_averaged = false;
  std::uint64_t spectral_trials = 1000;
  // spectrum
  std::string density = "all";
};

// Tool version and config hash travel with every output.
struct Resolved {
  json config;
  std::string hash;
};

double parse_threshold(const std::string& s) {
  if (s == "inf" || s == "+inf") return kPosInf;
  if (s == "-inf") return kNegInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Validation, "--threshold: expected a number, inf, -inf or auto");
}

json number_or_label(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) fail(ErrorCode::Validation, "--grid is required");
  std::vector<double> out;
  auto number = [](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::Validation, "--grid: bad number '" + s + "'");
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) fail(ErrorCode::Validation, "--grid: expected start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || b < a) fail(ErrorCode::Validation, "--grid: need start <= stop, step > 0");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) fail(ErrorCode::Validation, "--grid must be increasing");
  }
  return out;
}

unsigned resolve_threads(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("DHT_SPECTRUM_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) fail(ErrorCode::Validation, "cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream& os() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

class Runner {
 public:
  Runner(Options opt, std::ostream& out, std::ostream& err)
      : opt_(std::move(opt)), out_(out), err_(err) {}

  int run();

 private:
  double disp(double v) const { return opt_.bits ? v / std::log(2.0) : v; }
  json envelope(const Resolved& r) const {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config_hash", r.hash},
            {"units", opt_.bits ? "bits/symbol" : "nats/symbol"}, {"config", r.config}};
  }
  std::string csv_banner(const Resolved& r) const {
    std::ostringstream os;
    os << "# " << kToolName << ' ' << kToolVersion << " config_hash=" << r.hash
       << " units=" << (opt_.bits ? "bits/symbol" : "nats/symbol") << '\n';
    return os.str();
  }
  Resolved resolve(json config) const {
    config["tool"] = kToolName;
    config["version"] = kToolVersion;
    config["mode"] = opt_.mode;
    Resolved r{std::move(config), {}};
    r.hash = config_hash(r.config);
    return r;
  }
  bool dry_run(const Resolved& r) {
    if (!opt_.dry_run) return false;
    json doc = envelope(r);
    doc["dry_run"] = true;
    out_ << doc.dump(2) << '\n';
    return true;
  }

  std::vector<std::size_t> n_list_or(std::vector<std::size_t> fallback) const {
    std::vector<std::size_t> n = opt_.n_list.empty() ? std::move(fallback) : opt_.n_list;
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (n[i] == 0) fail(ErrorCode::Validation, "--n: blocklengths must be positive");
      if (i > 0 && n[i] <= n[i - 1]) fail(ErrorCode::Validation, "--n must be increasing");
    }
    return n;
  }
  double require_rate() const {
    if (!opt_.has_rate) fail(ErrorCode::Validation, "--rate is required");
    if (!(opt_.rate > 0.0)) fail(ErrorCode::Validation, "--rate must be positive");
    return opt_.rate;
  }
  double kappa_for(const ModelSpec& spec) const {
    if (opt_.has_kappa) {
      if (!(opt_.kappa > 0.0)) fail(ErrorCode::Validation, "--kappa must be positive");
      return opt_.kappa;
    }
    if (spec.channel && spec.channel->kind() == ChannelKind::GaussianAdditive) {
      return spec.channel->kappa();
    }
    fail(ErrorCode::Validation, "Gaussian model needs --kappa or a gaussian channel");
  }
  SpectralOptions spectral_options(double default_eps) const {
    SpectralOptions so;
    so.epsilon = opt_.has_epsilon ? opt_.epsilon : default_eps;
    so.threads = threads_;
    return so;
  }

  /// Exact inputs for IID models, estimated ones otherwise.
  SpectralInputs discrete_inputs(const ModelSpec& spec) const {
    const DiscreteJointSource& m = *spec.discrete;
    if (m.memory() == Memory::Iid) return iid_spectral_inputs(m, *spec.channel);
    const std::vector<std::size_t> n = n_list_or({256, 1024, 4096});
    SpectralOptions so;
    so.threads = threads_;
    return estimated_spectral_inputs(m, *spec.channel, n, opt_.spectral_trials,
                                     derive_seed(opt_.seed, seed_domain::kSpectrum, 99), so);
  }

  json report_json(const ExponentReport& r) const {
    return {{"r", disp(r.r)},
            {"binning_term", disp(r.binning_term)},
            {"decision_term", disp(r.decision_term)},
            {"penalty", disp(r.penalty)},
            {"theta", disp(r.theta)},
            {"theta_clamped", disp(r.theta_clamped)},
            {"feasible", r.feasible},
            {"regime", to_string(r.regime)}};
  }
  json inputs_json(const SpectralInputs& si) const {
    json j = {{"i_sup_xu", disp(si.i_sup_xu)},
              {"i_inf_xu", disp(si.i_inf_xu)},
              {"i_inf_uy", disp(si.i_inf_uy)},
              {"d_inf", disp(si.d_inf)},
              {"provenance", to_string(si.provenance)}};
    if (!si.estimates.empty()) {
      json est = json::array();
      for (const SpectralEstimate& e : si.estimates) est.push_back(estimate_json(e));
      j["estimates"] = est;
    }
    return j;
  }
  json estimate_json(const SpectralEstimate& e) const {
    json per_n = json::array();
    for (const SpectralPoint& p : e.per_n) {
      per_n.push_back({{"n", p.n},
                       {"lower_quantile", number_or_label(disp(p.lower_quantile))},
                       {"upper_quantile", number_or_label(disp(p.upper_quantile))},
                       {"mean", number_or_label(disp(p.mean))},
                       {"stddev", number_or_label(disp(p.stddev))},
                       {"finite", p.finite},
                       {"nonfinite", p.nonfinite}});
    }
    return {{"kind", to_string(e.kind)},
            {"epsilon", e.epsilon},
            {"value", number_or_label(disp(e.extrapolated))},
            {"converged", e.converged},
            {"excess_nonfinite", e.excess_nonfinite},
            {"per_n", per_n}};
  }
  json trace_json(const LimitTrace& t) const {
    json values = json::array();
    for (double v : t.values) values.push_back(disp(v));
    return {{"n", t.n}, {"values", values}, {"converged", t.converged},
            {"final_gap", disp(t.final_gap)}};
  }
  json gaussian_json(const GaussianExponent& g) const {
    return {{"kappa", g.kappa},
            {"report", report_json(g.report)},
            {"entropy_term", trace_json(g.entropy)},
            {"divergence_term", trace_json(g.divergence)},
            {"converged", g.converged},
            {"warnings", g.warnings}};
  }

  int cmd_exponent(const ModelSpec& spec);
  int cmd_simulate(const ModelSpec& spec);
  int cmd_sweep(const ModelSpec& spec);
  int cmd_spectrum(const ModelSpec& spec);

  Options opt_;
  std::ostream& out_;
  std::ostream& err_;
  unsigned threads_ = 1;
};

int Runner::run() {
  threads_ = resolve_threads(opt_.threads);
  const ModelSpec spec = load_model(opt_.model_path);
  for (const std::string& w : spec.warnings) err_ << "warning: " << w << '\n';
  if (opt_.mode == "exponent") return cmd_exponent(spec);
  if (opt_.mode == "simulate") return cmd_simulate(spec);
  if (opt_.mode == "sweep") return cmd_sweep(spec);
  return cmd_spectrum(spec);
}

int Runner::cmd_exponent(const ModelSpec& spec) {
  const double r = require_rate();
  json cfg = {{"model", spec.resolved}, {"rate", r}};
  json result;
  if (spec.kind == ModelKind::Gaussian) {
    const double kappa = kappa_for(spec);
    const std::vector<std::size_t> n = n_list_or({64, 128, 256, 512});
    cfg["kappa"] = kappa;
    cfg["n_list"] = n;
    const Resolved res = resolve(cfg);
    if (dry_run(res)) return kExitOk;
    const GaussianExponent g = gaussian_exponent(*spec.gaussian, kappa, r, n);
    result = envelope(res);
    result["gaussian"] = gaussian_json(g);
    result["report"] = report_json(g.report);
  } else {
    if (spec.discrete->memory() != Memory::Iid) {
      cfg["seed"] = opt_.seed;
      cfg["spectral"] = {{"n_list", n_list_or({256, 1024, 4096})},
                         {"trials", opt_.spectral_trials},
                         {"epsilon", 0.05}};
    }
    const Resolved res = resolve(cfg);
    if (dry_run(res)) return kExitOk;
    const SpectralInputs si = discrete_inputs(spec);
    result = envelope(res);
    result["inputs"] = inputs_json(si);
    result["report"] = report_json(theorem1_bound(si, r));
  }
  Output o(opt_.out_path, out_);
  o.os() << result.dump(2) << '\n';
  return kExitOk;
}

int Runner::cmd_simulate(const ModelSpec& spec) {
  if (spec.kind != ModelKind::Discrete) {
    fail(ErrorCode::Validation, "simulate needs a discrete model");
  }
  const double r = require_rate();
  const std::vector<std::size_t> n_list = n_list_or({32, 64, 128});
  const std::uint64_t trials = opt_.has_trials ? opt_.trials : 10000;
  if (trials < 2) fail(ErrorCode::Validation, "--trials must be at least 2");
  const double eps = opt_.has_epsilon ? opt_.epsilon : 0.02;
  if (!(eps > 0.0)) fail(ErrorCode::Validation, "--epsilon must be positive");

  json cfg = {{"model", spec.resolved},
              {"rate", r},
              {"n_list", n_list},
              {"trials", trials},
              {"seed", opt_.seed},
              {"epsilon", eps},
              {"threshold", opt_.threshold},
              {"codebook_cap", opt_.cap},
              {"codebook_averaged", opt_.codebook_averaged}};
  if (spec.discrete->memory() != Memory::Iid) {
    cfg["spectral"] = {{"n_list", n_list_or({256, 1024, 4096})},
                       {"trials", opt_.spectral_trials},
                       {"epsilon", 0.05}};
  }
  const Resolved res = resolve(cfg);
  if (dry_run(res)) return kExitOk;

  const SpectralInputs si = discrete_inputs(spec);
  CodecParams params = proof_codec_params(si, r, eps);
  if (opt_.threshold != "auto") params.threshold = parse_threshold(opt_.threshold);
  const ExponentReport theory = theorem1_bound(si, r);

  RunOptions ro;
  ro.threads = threads_;
  ro.codebook_averaged = opt_.codebook_averaged;
  ro.codebook_cap = opt_.cap;
  const CodecContext ctx(*spec.discrete, *spec.channel);

  Output csv(opt_.out_path, out_);
  csv.os() << csv_banner(res);
  write_simulation_csv_header(csv.os());
  std::vector<SimulationResult> results;
  json rows = json::array();
  json skipped = json::array();
  int status = kExitOk;
  for (std::size_t n : n_list) {
    err_ << "simulate: n=" << n << " trials=" << trials << '\n';
    try {
      results.push_back(run_experiment(ctx, params, n, trials, opt_.seed, ro));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CodebookTooLarge) throw;
      err_ << "error: " << e.what() << '\n';
      csv.os() << "# n=" << n << " skipped: " << e.what() << '\n';
      skipped.push_back({{"n", n}, {"error", to_string(e.code())}, {"message", e.what()}});
      status = kExitResourceCap;
      continue;
    }
    const SimulationResult& s = results.back();
    write_simulation_csv_row(csv.os(), s);
    rows.push_back({{"n", s.n},
                    {"m1", s.m1},
                    {"m2", s.m2},
                    {"alpha_hat", s.alpha_hat},
                    {"beta_hat", s.beta_hat},
                    {"ci_reliable", s.ci_reliable},
                    {"encoder_failures_h0", s.diagnostics[0].encoder_failures},
                    {"chosen_not_in_t2_h0", s.diagnostics[0].chosen_not_in_t2},
                    {"chosen_not_in_an_h0", s.diagnostics[0].chosen_not_in_an}});
  }
  csv.os().flush();

  json summary = envelope(res);
  summary["params"] = {{"r", params.r},
                       {"r0_lower", params.r0_lower},
                       {"r0_upper", params.r0_upper},
                       {"r_prime", params.r_prime},
                       {"threshold", number_or_label(params.threshold)},
                       {"epsilon", params.epsilon}};
  summary["theory"] = report_json(theory);
  summary["results"] = rows;
  summary["skipped"] = skipped;
  if (results.size() >= 3) {
    try {
      const ExponentFit fit = fit_exponent(results, theory.theta_clamped);
      json points = json::array(), bounds = json::array();
      for (const ExponentPoint& p : fit.points) points.push_back({{"n", p.n}, {"exponent", disp(p.exponent)}});
      for (const ExponentPoint& p : fit.zero_error_bounds) {
        bounds.push_back({{"n", p.n}, {"lower_bound", disp(p.exponent)}});
      }
      summary["fit"] = {{"points", points},
                        {"zero_error_bounds", bounds},
                        {"slope_estimate", disp(fit.slope_estimate)},
                        {"theoretical_theta", disp(*fit.theoretical_theta)}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllZeroErrors) throw;
      summary["fit"] = nullptr;
      summary["fit_error"] = to_string(e.code());
    }
  } else {
    summary["fit"] = nullptr;
    summary["fit_error"] = "fewer than three blocklengths";
  }
  std::string summary_path = opt_.summary_path;
  if (summary_path.empty() && !opt_.out_path.empty() && opt_.out_path != "-") {
    summary_path = opt_.out_path + ".json";
  }
  if (!summary_path.empty()) {
    Output js(summary_path, out_);
    js.os() << summary.dump(2) << '\n';
  }
  return status;
}

int Runner::cmd_sweep(const ModelSpec& spec) {
  if (opt_.axis != "rate" && opt_.axis != "kappa") {
    fail(ErrorCode::Validation, "--axis must be rate or kappa");
  }
  const std::vector<double> grid = parse_grid(opt_.grid);
  json cfg = {{"model", spec.resolved}, {"axis", opt_.axis}, {"grid", grid}};
  const bool gaussian = spec.kind == ModelKind::Gaussian;
  if (opt_.axis == "kappa" && !gaussian) fail(ErrorCode::Validation, "kappa sweep needs a Gaussian model");
  std::vector<std::size_t> n_list;
  double rate = 0.0, kappa = 0.0;
  if (opt_.axis == "kappa") {
    rate = require_rate();
    cfg["rate"] = rate;
    for (double k : grid) {
      if (!(k > 0.0)) fail(ErrorCode::Validation, "--grid: kappa values must be positive");
    }
  } else {
    for (double g : grid) {
      if (!(g > 0.0)) fail(ErrorCode::Validation, "--grid: rates must be positive");
    }
  }
  if (gaussian) {
    n_list = n_list_or({64, 128, 256, 512});
    cfg["n_list"] = n_list;
    if (opt_.axis == "rate") {
      kappa = kappa_for(spec);
      cfg["kappa"] = kappa;
    }
  } else if (spec.discrete->memory() != Memory::Iid) {
    cfg["seed"] = opt_.seed;
    cfg["spectral"] = {{"n_list", n_list_or({256, 1024, 4096})},
                       {"trials", opt_.spectral_trials},
                       {"epsilon", 0.05}};
  }
  const Resolved res = resolve(cfg);
  if (dry_run(res)) return kExitOk;

  struct Row {
    double kappa = std::nan("");
    double entropy_term = 0.0;
    double divergence_term = 0.0;
    ExponentReport rep;
  };
  std::vector<Row> rows;
  std::optional<double> crossover;
  if (opt_.axis == "rate") {
    SpectralInputs si;
    if (gaussian) {
      const GaussianExponent g = gaussian_exponent(*spec.gaussian, kappa, grid.front(), n_list);
      si.i_sup_xu = si.i_inf_xu = g.entropy.values.back();
      si.d_inf = g.divergence.values.back();
    } else {
      si = discrete_inputs(spec);
    }
    const RateSweep sweep = sweep_rate(si, grid);
    crossover = sweep.crossover;
    for (const ExponentReport& rep : sweep.reports) {
      rows.push_back({gaussian ? kappa : std::nan(""), si.i_sup_xu - si.i_inf_uy, si.d_inf, rep});
    }
  } else {
    for (double k : grid) {
      const GaussianExponent g = gaussian_exponent(*spec.gaussian, k, rate, n_list);
      rows.push_back({k, g.entropy.values.back(), g.divergence.values.back(), g.report});
    }
  }

  Output o(opt_.out_path, out_);
  std::ostream& os = o.os();
  os << csv_banner(res);
  const bool any_feasible =
      std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.rep.feasible; });
  if (crossover) os << "# crossover_r=" << format_double(disp(*crossover)) << '\n';
  if (!any_feasible) {
    os << "# AllInfeasible: no grid point has a positive binning term\n";
    os << "r,kappa,binning,decision,penalty,theta,regime,feasible,entropy_term,divergence_term,"
          "theta_clamped\n";
    err_ << "sweep: every grid point is infeasible\n";
    return kExitOk;
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].rep.regime != rows[i].rep.regime) {
      os << "# regime_switch " << to_string(rows[i - 1].rep.regime) << "->"
         << to_string(rows[i].rep.regime) << " between " << opt_.axis << '='
         << format_double(opt_.axis == "rate" ? disp(grid[i - 1]) : grid[i - 1]) << " and "
         << format_double(opt_.axis == "rate" ? disp(grid[i]) : grid[i]) << '\n';
    }
  }
  os << "r,kappa,binning,decision,penalty,theta,regime,feasible,entropy_term,divergence_term,"
        "theta_clamped\n";
  for (const Row& row : rows) {
    os << format_double(disp(row.rep.r)) << ','
       << (std::isnan(row.kappa) ? std::string() : format_double(row.kappa)) << ','
       << format_double(disp(row.rep.binning_term)) << ','
       << format_double(disp(row.rep.decision_term)) << ',' << format_double(disp(row.rep.penalty))
       << ',' << format_double(disp(row.rep.theta)) << ',' << to_string(row.rep.regime) << ','
       << (row.rep.feasible ? "true" : "false") << ',' << format_double(disp(row.entropy_term))
       << ',' << format_double(disp(row.divergence_term)) << ','
       << format_double(disp(row.rep.theta_clamped)) << '\n';
  }
  return kExitOk;
}

int Runner::cmd_spectrum(const ModelSpec& spec) {
  if (spec.kind != ModelKind::Discrete) fail(ErrorCode::Validation, "spectrum needs a discrete model");
  if (opt_.density != "all" && opt_.density != "xu" && opt_.density != "uy" &&
      opt_.density != "div") {
    fail(ErrorCode::Validation, "--density must be xu, uy, div or all");
  }
  const std::vector<std::size_t> n_list = n_list_or({256, 1024, 4096});
  const std::uint64_t trials = opt_.has_trials ? opt_.trials : 2000;
  const SpectralOptions so = spectral_options(0.05);
  json cfg = {{"model", spec.resolved}, {"n_list", n_list}, {"trials", trials},
              {"seed", opt_.seed},      {"epsilon", so.epsilon}, {"density", opt_.density}};
  const Resolved res = resolve(cfg);
  if (dry_run(res)) return kExitOk;

  struct Job {
    const char* key;
    DensityKind kind;
    DensitySampler sampler;
  };
  std::vector<Job> jobs;
  const DiscreteJointSource& m = *spec.discrete;
  const TestChannel& ch = *spec.channel;
  if (opt_.density == "all" || opt_.density == "xu") {
    jobs.push_back({"xu", DensityKind::XuInfo, xu_density_sampler(m, ch)});
  }
  if (opt_.density == "all" || opt_.density == "uy") {
    jobs.push_back({"uy", DensityKind::UyInfo, uy_density_sampler(m, ch)});
  }
  if (opt_.density == "all" || opt_.density == "div") {
    jobs.push_back({"div", DensityKind::UyDivergence, divergence_density_sampler(m, ch)});
  }
  json summary = envelope(res);
  json estimates = json::object();
  std::unique_ptr<Output> csv;
  if (!opt_.out_path.empty() && opt_.out_path != "-") {
    csv = std::make_unique<Output>(opt_.out_path, out_);
    csv->os() << csv_banner(res);
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (trials < 100) fail(ErrorCode::TooFewTrials, "spectrum needs at least 100 trials");
    err_ << "spectrum: " << jobs[j].key << '\n';
    const DensitySamples samples = sample_densities(
        jobs[j].sampler, n_list, trials, derive_seed(opt_.seed, seed_domain::kSpectrum, j),
        so.threads);
    estimates[jobs[j].key] = {
        {"density", to_string(jobs[j].kind)},
        {"p_liminf", estimate_json(estimate_from_samples(SpectralKind::PLimInf, samples, so))},
        {"p_limsup", estimate_json(estimate_from_samples(SpectralKind::PLimSup, samples, so))}};
    if (csv) write_density_csv(csv->os(), jobs[j].kind, samples);
  }
  summary["estimates"] = estimates;
  std::string summary_path = opt_.summary_path;
  if (summary_path.empty() && csv) summary_path = opt_.out_path + ".json";
  Output js(summary_path, out_);
  js.os() << summary.dump(2) << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::CodebookTooLarge: return kExitResourceCap;
    case ErrorCode::InvalidArgument:
    case ErrorCode::Validation:
    case ErrorCode::MarginalMismatch:
    case ErrorCode::SymbolOutOfAlphabet:
    case ErrorCode::KindMismatch:
    case ErrorCode::Unsupported:
    case ErrorCode::TooFewTrials:
    case ErrorCode::AlphabetTooLarge:
    case ErrorCode::NonSpd:
      return kExitValidation;
    default: return kExitFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Distributed hypothesis testing: exponents, spectra and codec simulation",
               std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model_path, "Model JSON file")->required();
    sub->add_option("--n", opt.n_list, "Blocklengths, comma separated")->delimiter(',');
    sub->add_option("--seed", opt.seed, "Master seed");
    sub->add_option("--out", opt.out_path, "Output path (default: standard output)");
    sub->add_option("--threads", opt.threads, "Worker threads (env DHT_SPECTRUM_THREADS)");
    sub->add_flag("--dry-run", opt.dry_run, "Print the resolved config and stop");
    sub->add_flag("--bits", opt.bits, "Display rates in bits instead of nats");
    sub->add_option("--spectral-trials", opt.spectral_trials,
                    "Trials per n for estimated spectral inputs of non-IID models");
  };
  auto add_rate = [&](CLI::App* sub) {
    sub->add_option("--rate", opt.rate, "Rate r, nats/symbol")
        ->each([&](const std::string&) { opt.has_rate = true; });
  };
  auto add_kappa = [&](CLI::App* sub) {
    sub->add_option("--kappa", opt.kappa, "Gaussian test-channel noise variance")
        ->each([&](const std::string&) { opt.has_kappa = true; });
  };
  auto add_trials = [&](CLI::App* sub) {
    sub->add_option("--trials", opt.trials, "Monte Carlo trials")
        ->each([&](const std::string&) { opt.has_trials = true; });
  };
  auto add_epsilon = [&](CLI::App* sub, const char* what) {
    sub->add_option("--epsilon", opt.epsilon, what)
        ->each([&](const std::string&) { opt.has_epsilon = true; });
  };

  CLI::App* exponent = app.add_subcommand("exponent", "Achievable exponent report (JSON)");
  common(exponent);
  add_rate(exponent);
  add_kappa(exponent);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo codec simulation (CSV + JSON)");
  common(simulate);
  add_rate(simulate);
  add_trials(simulate);
  add_epsilon(simulate, "Typicality slack, nats/symbol (default 0.02)");
  simulate->add_option("--threshold", opt.threshold, "Decision threshold S, or auto");
  simulate->add_option("--summary", opt.summary_path, "JSON summary path");
  simulate->add_option("--cap", opt.cap, "Largest codebook allowed");
  simulate->add_flag("--codebook-averaged", opt.codebook_averaged, "Fresh codebook per trial");

  CLI::App* sweep = app.add_subcommand("sweep", "Exponent curve over rate or kappa (CSV)");
  common(sweep);
  add_rate(sweep);
  add_kappa(sweep);
  sweep->add_option("--axis", opt.axis, "rate or kappa");
  sweep->add_option("--grid", opt.grid, "start:stop:step or a comma list")->required();

  CLI::App* spectrum = app.add_subcommand("spectrum", "Information-density quantiles (JSON, CSV)");
  common(spectrum);
  add_trials(spectrum);
  add_epsilon(spectrum, "Quantile level (default 0.05)");
  spectrum->add_option("--density", opt.density, "xu, uy, div or all");
  spectrum->add_option("--summary", opt.summary_path, "JSON summary path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  for (CLI::App* sub : {exponent, simulate, sweep, spectrum}) {
    if (sub->parsed()) opt.mode = sub->get_name();
  }

  try {
    Runner runner(std::move(opt), out, err);
    return runner.run();
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dht::cli
