#include "dht/codec_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "dht/errors.hpp"
#include "dht/info_spectrum.hpp"

namespace dht {

std::uint64_t codebook_size(double rate, std::size_t n) {
  const double exponent = rate * static_cast<double>(n);
  if (std::isnan(exponent)) fail(ErrorCode::InvalidArgument, "codebook rate is NaN");
  constexpr double kMaxExponent = 43.668272375276554;  // ln 2^63
  if (exponent >= kMaxExponent) return std::uint64_t{1} << 63;
  if (exponent <= 0.0) return 1;
  const double v = std::exp(exponent);
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-9 * v) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(v));
}

std::vector<std::uint32_t> Codebook::bin_members(std::uint64_t bin) const {
  auto lo = std::lower_bound(by_bin.begin(), by_bin.end(), std::make_pair(bin, std::uint32_t{0}));
  std::vector<std::uint32_t> out;
  for (auto it = lo; it != by_bin.end() && it->first == bin; ++it) out.push_back(it->second);
  return out;
}

namespace {

// Per-symbol logs summed cell by cell: sequences of the same type get
// bit-identical totals.
template <class CellOf, class LogOf>
double type_sum(std::size_t n, std::size_t cells, CellOf cell_of, LogOf log_of) {
  constexpr std::size_t kInline = 64;
  std::array<std::uint32_t, kInline> small{};
  thread_local std::vector<std::uint32_t> large;
  std::uint32_t* counts = small.data();
  if (cells > kInline) {
    large.assign(cells, 0);
    counts = large.data();
  }
  for (std::size_t t = 0; t < n; ++t) ++counts[cell_of(t)];
  double acc = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (counts[c] != 0) acc += static_cast<double>(counts[c]) * log_of(c);
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------

CodecContext::CodecContext(DiscreteJointSource model, TestChannel channel)
    : model_(std::move(model)), channel_(std::move(channel)) {
  channel_.require_discrete(model_.nx());
  iid_ = model_.memory() == Memory::Iid;
  if (!iid_) return;
  const std::size_t nx = model_.nx(), ny = model_.ny(), nu = channel_.nu();
  const JointPmf& p0 = model_.step_pmf(Hypothesis::H0);
  const std::vector<double> px = p0.marginal_x();
  const std::vector<double> py = p0.marginal_y();
  std::vector<double> pu(nu, 0.0);
  for (std::size_t h = 0; h < 2; ++h) log_puy_[h].assign(nu * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t u = 0; u < nu; ++u) {
      const double w = channel_.prob(u, x);
      pu[u] += px[x] * w;
      for (std::size_t y = 0; y < ny; ++y) {
        log_puy_[0][u * ny + y] += w * model_.step_pmf(Hypothesis::H0)(x, y);
        log_puy_[1][u * ny + y] += w * model_.step_pmf(Hypothesis::H1)(x, y);
      }
    }
  }
  auto to_log = [](double p) { return p > 0.0 ? std::log(p) : kNegInf; };
  for (auto& table : log_puy_) std::transform(table.begin(), table.end(), table.begin(), to_log);
  log_pu_.resize(nu);
  std::transform(pu.begin(), pu.end(), log_pu_.begin(), to_log);
  log_py_.resize(ny);
  std::transform(py.begin(), py.end(), log_py_.begin(), to_log);
}

double CodecContext::log_channel(SymbolSpan x, SymbolSpan u) const {
  const std::size_t nu = channel_.nu();
  return type_sum(x.size(), channel_.nx() * nu, [&](std::size_t t) { return x[t] * nu + u[t]; },
                  [&](std::size_t cell) { return channel_.log_prob(cell % nu, cell / nu); });
}

double CodecContext::log_marginal_u(SymbolSpan u) const {
  if (!iid_) return dht::log_marginal_u(model_, channel_, u);
  return type_sum(u.size(), log_pu_.size(), [&](std::size_t t) { return u[t]; },
                  [&](std::size_t cell) { return log_pu_[cell]; });
}

double CodecContext::log_joint_uy(SymbolSpan u, SymbolSpan y, Hypothesis h) const {
  if (!iid_) return dht::log_joint_uy(model_, channel_, u, y, h);
  const std::vector<double>& table = log_puy_[index_of(h)];
  const std::size_t ny = model_.ny();
  return type_sum(u.size(), table.size(), [&](std::size_t t) { return u[t] * ny + y[t]; },
                  [&](std::size_t cell) { return table[cell]; });
}

double CodecContext::log_marginal_y(SymbolSpan y) const {
  if (!iid_) return dht::log_marginal_y(model_, Hypothesis::H0, y);
  return type_sum(y.size(), log_py_.size(), [&](std::size_t t) { return y[t]; },
                  [&](std::size_t cell) { return log_py_[cell]; });
}

// ---------------------------------------------------------------------------

Codebook build_codebook(const CodecContext& ctx, std::size_t n, const CodecParams& params,
                        std::uint64_t seed, std::uint64_t cap) {
  params.validate();
  if (n == 0) fail(ErrorCode::InvalidArgument, "blocklength must be positive");
  Codebook cb;
  cb.n = n;
  cb.seed = seed;
  cb.m1 = codebook_size(params.r0_upper + params.slack_t1(), n);
  cb.m2 = codebook_size(params.r, n);
  if (cb.m1 > cap) {
    std::ostringstream os;
    os << "codebook needs M1 = " << cb.m1 << " codewords at n = " << n << ", cap is " << cap;
    fail(ErrorCode::CodebookTooLarge, os.str());
  }
  cb.words.resize(cb.m1 * n);
  cb.bin_of.resize(cb.m1);
  cb.log_pu.resize(cb.m1);
  cb.by_bin.resize(cb.m1);
  for (std::uint64_t i = 0; i < cb.m1; ++i) {
    CounterRng word_rng(derive_seed(seed, seed_domain::kCodeword, i));
    const SamplePair src = sample_block(ctx.model(), Hypothesis::H0, n, word_rng);
    const Sequence u = apply_test_channel(ctx.channel(), src.x, word_rng);
    std::copy(u.begin(), u.end(), cb.words.begin() + static_cast<std::ptrdiff_t>(i * n));
    cb.log_pu[i] = ctx.log_marginal_u(u);
    CounterRng bin_rng(derive_seed(seed, seed_domain::kBin, i));
    cb.bin_of[i] = bin_rng.below(cb.m2);
    cb.by_bin[i] = {cb.bin_of[i], static_cast<std::uint32_t>(i)};
  }
  std::sort(cb.by_bin.begin(), cb.by_bin.end());
  return cb;
}

Codebook build_codebook(const DiscreteJointSource& model, const TestChannel& channel,
                        std::size_t n, const CodecParams& params, std::uint64_t seed,
                        std::uint64_t cap) {
  return build_codebook(CodecContext(model, channel), n, params, seed, cap);
}

void write_codebook(std::ostream& os, const Codebook& cb) {
  os << "# codebook n=" << cb.n << " m1=" << cb.m1 << " m2=" << cb.m2 << " seed=" << cb.seed
     << '\n';
  for (std::size_t i = 0; i < cb.m1; ++i) {
    const SymbolSpan w = cb.codeword(i);
    for (std::size_t t = 0; t < w.size(); ++t) os << (t ? " " : "") << w[t];
    os << '\t' << cb.bin_of[i] << '\n';
  }
}

// ---------------------------------------------------------------------------

constexpr double kTieTolerance = 1e-12;

EncodeResult encode(SymbolSpan x, const Codebook& cb, const CodecContext& ctx,
                    const CodecParams& params) {
  if (x.size() != cb.n) fail(ErrorCode::InvalidArgument, "source block length mismatch");
  for (Symbol s : x) {
    if (s >= ctx.model().nx()) fail(ErrorCode::SymbolOutOfAlphabet, "x symbol outside alphabet");
  }
  const double lower = params.r0_lower - params.slack_t1();
  const double upper = params.r0_upper + params.slack_t1();
  EncodeResult best;
  double best_log = kNegInf;
  for (std::size_t i = 0; i < cb.m1; ++i) {
    const double log_cond = ctx.log_channel(x, cb.codeword(i));
    const double density = normalized_log_ratio(log_cond, cb.log_pu[i], cb.n);
    if (!(density > lower && density < upper)) continue;
    // Likelihoods within rounding of each other count as a tie.
    if (!best.sent || log_cond > best_log + kTieTolerance * std::max(1.0, std::abs(best_log))) {
      best.sent = true;
      best.codeword = static_cast<std::uint32_t>(i);
      best_log = log_cond;
    }
  }
  if (best.sent) best.bin = cb.bin_of[best.codeword];
  return best;
}

bool in_t2(std::size_t codeword, SymbolSpan y, double log_py, const Codebook& cb,
           const CodecContext& ctx, const CodecParams& params) {
  const SymbolSpan u = cb.codeword(codeword);
  const double log_joint = ctx.log_joint_uy(u, y, Hypothesis::H0);
  const double log_cond = log_joint == kNegInf ? kNegInf : log_joint - log_py;
  const double density = normalized_log_ratio(log_cond, cb.log_pu[codeword], cb.n);
  return density > params.r_prime - params.slack_t2();
}

bool in_acceptance_region(std::size_t codeword, SymbolSpan y, const Codebook& cb,
                          const CodecContext& ctx, const CodecParams& params) {
  const SymbolSpan u = cb.codeword(codeword);
  const double density = normalized_log_ratio(ctx.log_joint_uy(u, y, Hypothesis::H0),
                                              ctx.log_joint_uy(u, y, Hypothesis::H1), cb.n);
  return density > params.threshold - params.slack_an();
}

DecodeResult decode(const EncodeResult& message, SymbolSpan y, const Codebook& cb,
                    const CodecContext& ctx, const CodecParams& params) {
  DecodeResult out;
  if (!message.sent) return out;
  if (y.size() != cb.n) fail(ErrorCode::InvalidArgument, "side information length mismatch");
  const double log_py = ctx.log_marginal_y(y);
  auto lo = std::lower_bound(cb.by_bin.begin(), cb.by_bin.end(),
                             std::make_pair(message.bin, std::uint32_t{0}));
  for (auto it = lo; it != cb.by_bin.end() && it->first == message.bin; ++it) {
    if (in_t2(it->second, y, log_py, cb, ctx, params)) {
      out.debinned = it->second;
      out.t2_pass = true;
      break;
    }
  }
  if (!out.debinned) return out;
  out.an_pass = in_acceptance_region(*out.debinned, y, cb, ctx, params);
  out.decision = out.an_pass ? Hypothesis::H0 : Hypothesis::H1;
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(ErrorEvent e) noexcept {
  switch (e) {
    case ErrorEvent::Correct: return "Correct";
    case ErrorEvent::E11: return "E11";
    case ErrorEvent::E12: return "E12";
    case ErrorEvent::E21: return "E21";
    case ErrorEvent::E22: return "E22";
  }
  return "unknown";
}

ErrorEvent classify_event(const TrialTrace& trace) {
  auto inconsistent = [](const char* why) { fail(ErrorCode::InconsistentTrace, why); };
  if (!trace.sent && (trace.chosen || trace.debinned)) {
    inconsistent("error message with a codeword attached");
  }
  if (trace.sent && !trace.chosen) inconsistent("sent bin without an encoder codeword");
  if (trace.debinned && !trace.t2_pass) inconsistent("debinned codeword failed T2");
  if (!trace.debinned && (trace.t2_pass || trace.an_pass)) {
    inconsistent("T2/A_n flags without a debinned codeword");
  }
  const bool should_accept = trace.debinned && trace.an_pass;
  if ((trace.decision == Hypothesis::H0) != should_accept) {
    inconsistent("decision disagrees with the T2/A_n flags");
  }

  const bool mismatch = trace.debinned && trace.chosen && *trace.debinned != *trace.chosen;
  if (trace.hypothesis == Hypothesis::H0) {
    if (trace.decision == Hypothesis::H0) return ErrorEvent::Correct;
    return mismatch && !trace.an_pass ? ErrorEvent::E12 : ErrorEvent::E11;
  }
  if (trace.decision == Hypothesis::H1) return ErrorEvent::Correct;
  return mismatch ? ErrorEvent::E21 : ErrorEvent::E22;
}

TrialTrace run_trial(const Codebook& cb, const CodecContext& ctx, const CodecParams& params,
                     Hypothesis h, CounterRng& rng) {
  const SamplePair src = sample_block(ctx.model(), h, cb.n, rng);
  const EncodeResult msg = encode(src.x, cb, ctx, params);
  const DecodeResult dec = decode(msg, src.y, cb, ctx, params);
  TrialTrace trace;
  trace.hypothesis = h;
  trace.sent = msg.sent;
  trace.bin = msg.bin;
  if (msg.sent) {
    trace.chosen = msg.codeword;
    trace.chosen_in_t2 = in_t2(msg.codeword, src.y, ctx.log_marginal_y(src.y), cb, ctx, params);
    trace.chosen_in_an = in_acceptance_region(msg.codeword, src.y, cb, ctx, params);
  }
  trace.debinned = dec.debinned;
  trace.t2_pass = dec.t2_pass;
  trace.an_pass = dec.an_pass;
  trace.decision = dec.decision;
  trace.event = classify_event(trace);
  return trace;
}

}  // namespace dht
