#include "dht/source_models.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dht/errors.hpp"

namespace dht {

const char* to_string(Hypothesis h) noexcept { return h == Hypothesis::H0 ? "H0" : "H1"; }

const char* to_string(Memory m) noexcept {
  switch (m) {
    case Memory::Iid: return "iid";
    case Memory::Markov: return "markov";
    case Memory::Mixture: return "mixture";
  }
  return "unknown";
}

double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

namespace {

void check_distribution(std::span<const double> p, double tolerance, const std::string& what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::Validation, what + ": entries must be finite and nonnegative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream os;
    os << what << ": sums to " << total << ", expected 1";
    fail(ErrorCode::Validation, os.str());
  }
}

// Cumulative table with every entry from the last positive cell onward
// pinned to exactly 1, so categorical() never lands on a zero-mass tail.
std::vector<double> make_cdf(std::span<const double> p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
    if (p[i] > 0.0) last_positive = i;
  }
  for (std::size_t i = last_positive; i < p.size(); ++i) cdf[i] = 1.0;
  return cdf;
}

void check_sequence(SymbolSpan s, std::size_t alphabet, const char* name) {
  for (Symbol v : s) {
    if (v >= alphabet) {
      std::ostringstream os;
      os << name << " symbol " << v << " outside alphabet of size " << alphabet;
      fail(ErrorCode::SymbolOutOfAlphabet, os.str());
    }
  }
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) fail(ErrorCode::InvalidArgument, "sequence lengths differ");
}

double log_sum_exp(std::span<const double> terms) {
  double acc = kNegInf;
  for (double t : terms) acc = log_add(acc, t);
  return acc;
}

// log sum_{x^n, y^n} P_h(x^n, y^n) prod_t w_t(x_t, y_t), where fill(t, w)
// writes the per-step weights over pair states.
template <class Fill>
double iid_log_mass(std::span<const double> pmf, std::size_t n, std::vector<double>& w,
                    Fill&& fill) {
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    fill(t, std::span<double>(w));
    double v = 0.0;
    for (std::size_t s = 0; s < pmf.size(); ++s) v += pmf[s] * w[s];
    if (v <= 0.0) return kNegInf;
    acc += std::log(v);
  }
  return acc;
}

template <class Fill>
double markov_log_mass(const MarkovLaw& law, std::size_t states, std::size_t n,
                       std::vector<double>& w, Fill&& fill) {
  if (n == 0) return 0.0;
  std::vector<double> alpha(states), next(states);
  fill(0, std::span<double>(w));
  double scale = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    alpha[s] = law.initial[s] * w[s];
    scale += alpha[s];
  }
  if (scale <= 0.0) return kNegInf;
  double acc = std::log(scale);
  for (double& a : alpha) a /= scale;
  for (std::size_t t = 1; t < n; ++t) {
    fill(t, std::span<double>(w));
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < states; ++s) {
      if (alpha[s] == 0.0) continue;
      const double* row = law.transition.data() + s * states;
      for (std::size_t r = 0; r < states; ++r) next[r] += alpha[s] * row[r];
    }
    scale = 0.0;
    for (std::size_t r = 0; r < states; ++r) {
      next[r] *= w[r];
      scale += next[r];
    }
    if (scale <= 0.0) return kNegInf;
    acc += std::log(scale);
    for (std::size_t r = 0; r < states; ++r) alpha[r] = next[r] / scale;
  }
  return acc;
}

template <class Fill>
double log_mass(const DiscreteJointSource& m, Hypothesis h, std::size_t n, Fill&& fill) {
  std::vector<double> w(m.states());
  switch (m.memory()) {
    case Memory::Iid:
      return iid_log_mass(m.step_pmf(h).probs(), n, w, fill);
    case Memory::Markov:
      return markov_log_mass(m.markov_law(h), m.states(), n, w, fill);
    case Memory::Mixture: {
      std::vector<double> terms;
      for (const auto& c : m.components()) {
        const JointPmf& pmf = h == Hypothesis::H0 ? c.h0 : c.h1;
        terms.push_back(std::log(c.weight) + iid_log_mass(pmf.probs(), n, w, fill));
      }
      return log_sum_exp(terms);
    }
  }
  return kNegInf;
}

}  // namespace

// ---------------------------------------------------------------------------

JointPmf::JointPmf(std::size_t nx, std::size_t ny, std::vector<double> probs, double tolerance)
    : nx_(nx), ny_(ny), probs_(std::move(probs)) {
  if (nx == 0 || ny == 0 || probs_.size() != nx * ny) {
    fail(ErrorCode::Validation, "joint pmf shape does not match alphabet sizes");
  }
  check_distribution(probs_, tolerance, "joint pmf");
}

std::vector<double> JointPmf::marginal_x() const {
  std::vector<double> out(nx_, 0.0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) out[x] += (*this)(x, y);
  return out;
}

std::vector<double> JointPmf::marginal_y() const {
  std::vector<double> out(ny_, 0.0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t y = 0; y < ny_; ++y) out[y] += (*this)(x, y);
  return out;
}

std::vector<double> stationary_distribution(std::span<const double> transition,
                                            std::size_t states) {
  Eigen::MatrixXd kernel_t(states, states);
  for (std::size_t i = 0; i < states; ++i)
    for (std::size_t j = 0; j < states; ++j) kernel_t(j, i) = transition[i * states + j];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(kernel_t);
  const auto& values = solver.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (std::abs(values[i] - 1.0) < std::abs(values[best] - 1.0)) best = i;
  }
  Eigen::VectorXd v = solver.eigenvectors().col(best).real();
  const double total = v.sum();
  std::vector<double> pi(states);
  for (std::size_t i = 0; i < states; ++i) pi[i] = std::max(0.0, v[i] / total);
  const double renorm = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& p : pi) p /= renorm;
  return pi;
}

DiscreteJointSource DiscreteJointSource::iid(JointPmf h0, JointPmf h1) {
  if (h0.nx() != h1.nx() || h0.ny() != h1.ny()) {
    fail(ErrorCode::Validation, "hypotheses use different alphabets");
  }
  DiscreteJointSource m;
  m.memory_ = Memory::Iid;
  m.nx_ = h0.nx();
  m.ny_ = h0.ny();
  m.step_[0] = std::move(h0);
  m.step_[1] = std::move(h1);
  m.build_tables();
  return m;
}

DiscreteJointSource DiscreteJointSource::markov(std::size_t nx, std::size_t ny, MarkovLaw h0,
                                                MarkovLaw h1) {
  const std::size_t states = nx * ny;
  DiscreteJointSource m;
  m.memory_ = Memory::Markov;
  m.nx_ = nx;
  m.ny_ = ny;
  m.markov_[0] = std::move(h0);
  m.markov_[1] = std::move(h1);
  for (std::size_t h = 0; h < 2; ++h) {
    const MarkovLaw& law = m.markov_[h];
    if (states == 0 || law.initial.size() != states ||
        law.transition.size() != states * states) {
      fail(ErrorCode::Validation, "markov law shape does not match alphabet sizes");
    }
    check_distribution(law.initial, kValidationTolerance, "markov initial law");
    for (std::size_t s = 0; s < states; ++s) {
      check_distribution(std::span<const double>(law.transition).subspan(s * states, states),
                         kValidationTolerance, "markov transition row");
    }
    m.step_[h] = JointPmf(nx, ny, stationary_distribution(law.transition, states), 1e-6);
  }
  m.build_tables();
  return m;
}

DiscreteJointSource DiscreteJointSource::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) fail(ErrorCode::Validation, "mixture needs at least one component");
  DiscreteJointSource m;
  m.memory_ = Memory::Mixture;
  m.nx_ = components.front().h0.nx();
  m.ny_ = components.front().h0.ny();
  std::vector<double> weights;
  std::vector<double> avg[2] = {std::vector<double>(m.nx_ * m.ny_, 0.0),
                                std::vector<double>(m.nx_ * m.ny_, 0.0)};
  for (const auto& c : components) {
    if (c.h0.nx() != m.nx_ || c.h1.nx() != m.nx_ || c.h0.ny() != m.ny_ ||
        c.h1.ny() != m.ny_) {
      fail(ErrorCode::Validation, "mixture components use different alphabets");
    }
    if (!(c.weight > 0.0)) fail(ErrorCode::Validation, "mixture weights must be positive");
    weights.push_back(c.weight);
    for (std::size_t s = 0; s < m.states(); ++s) {
      avg[0][s] += c.weight * c.h0.probs()[s];
      avg[1][s] += c.weight * c.h1.probs()[s];
    }
  }
  check_distribution(weights, kValidationTolerance, "mixture weights");
  m.components_ = std::move(components);
  m.step_[0] = JointPmf(m.nx_, m.ny_, std::move(avg[0]));
  m.step_[1] = JointPmf(m.nx_, m.ny_, std::move(avg[1]));
  m.build_tables();
  return m;
}

void DiscreteJointSource::build_tables() {
  for (std::size_t h = 0; h < 2; ++h) {
    step_cdf_[h] = make_cdf(step_[h].probs());
    init_cdf_[h].clear();
    trans_cdf_[h].clear();
    comp_cdf_[h].clear();
    if (memory_ == Memory::Markov) {
      init_cdf_[h] = make_cdf(markov_[h].initial);
      const std::size_t s = states();
      trans_cdf_[h].reserve(s * s);
      for (std::size_t i = 0; i < s; ++i) {
        auto row = make_cdf(std::span<const double>(markov_[h].transition).subspan(i * s, s));
        trans_cdf_[h].insert(trans_cdf_[h].end(), row.begin(), row.end());
      }
    }
    for (const auto& c : components_) {
      comp_cdf_[h].push_back(make_cdf(h == 0 ? c.h0.probs() : c.h1.probs()));
    }
  }
  std::vector<double> weights;
  for (const auto& c : components_) weights.push_back(c.weight);
  weight_cdf_ = make_cdf(weights);
}

DiscreteJointSource DiscreteJointSource::swapped() const {
  DiscreteJointSource m = *this;
  std::swap(m.step_[0], m.step_[1]);
  std::swap(m.markov_[0], m.markov_[1]);
  for (auto& c : m.components_) std::swap(c.h0, c.h1);
  m.build_tables();
  return m;
}

// ---------------------------------------------------------------------------

BlockIidSource::BlockIidSource(std::size_t block_x, std::size_t block_y, std::size_t base_x,
                               std::size_t base_y, JointPmf block_h0, JointPmf block_h1)
    : m_(block_x), n_(block_y), base_x_(base_x), base_y_(base_y),
      h0_(std::move(block_h0)), h1_(std::move(block_h1)) {
  if (m_ == 0 || n_ == 0 || base_x_ == 0 || base_y_ == 0) {
    fail(ErrorCode::Validation, "block dimensions and bases must be positive");
  }
  auto power = [](std::size_t base, std::size_t e) {
    std::size_t v = 1;
    for (std::size_t i = 0; i < e; ++i) v *= base;
    return v;
  };
  const std::size_t sx = power(base_x_, m_);
  const std::size_t sy = power(base_y_, n_);
  for (const JointPmf* p : {&h0_, &h1_}) {
    if (p->nx() != sx || p->ny() != sy) {
      fail(ErrorCode::Validation, "block pmf shape must be base_x^M x base_y^N");
    }
  }
}

DiscreteJointSource BlockIidSource::reduce() const { return DiscreteJointSource::iid(h0_, h1_); }

Symbol BlockIidSource::pack(SymbolSpan block, std::size_t base) {
  Symbol v = 0;
  for (Symbol d : block) {
    if (d >= base) fail(ErrorCode::SymbolOutOfAlphabet, "block digit outside base");
    v = static_cast<Symbol>(v * base + d);
  }
  return v;
}

Sequence BlockIidSource::unpack(Symbol super, std::size_t length, std::size_t base) {
  Sequence out(length);
  for (std::size_t i = length; i-- > 0;) {
    out[i] = static_cast<Symbol>(super % base);
    super = static_cast<Symbol>(super / base);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void compare_marginals(const JointPmf& a, const JointPmf& b, std::ptrdiff_t component,
                       double tolerance, MarginalReport& report) {
  auto check = [&](const std::vector<double>& pa, const std::vector<double>& pb, char axis) {
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double dev = std::abs(pa[i] - pb[i]);
      report.max_deviation = std::max(report.max_deviation, dev);
      if (dev > tolerance) {
        report.ok = false;
        report.violations.push_back({axis, i, dev, component});
      }
    }
  };
  check(a.marginal_x(), b.marginal_x(), 'X');
  check(a.marginal_y(), b.marginal_y(), 'Y');
}

}  // namespace

MarginalReport validate_marginals(const DiscreteJointSource& model, double tolerance) {
  MarginalReport report;
  compare_marginals(model.step_pmf(Hypothesis::H0), model.step_pmf(Hypothesis::H1), -1,
                    tolerance, report);
  const auto comps = model.components();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    compare_marginals(comps[k].h0, comps[k].h1, static_cast<std::ptrdiff_t>(k), tolerance,
                      report);
  }
  return report;
}

void require_equal_marginals(const DiscreteJointSource& model, double tolerance) {
  const MarginalReport report = validate_marginals(model, tolerance);
  if (report.ok) return;
  const auto worst = std::max_element(
      report.violations.begin(), report.violations.end(),
      [](const auto& a, const auto& b) { return a.deviation < b.deviation; });
  std::ostringstream os;
  os << "marginal of " << worst->axis << " differs across hypotheses at symbol "
     << worst->symbol << " (deviation " << worst->deviation << ")";
  fail(ErrorCode::MarginalMismatch, os.str());
}

// ---------------------------------------------------------------------------

TestChannel TestChannel::discrete(std::size_t nx, std::size_t nu, std::vector<double> rows,
                                  double tolerance) {
  if (nx == 0 || nu == 0 || rows.size() != nx * nu) {
    fail(ErrorCode::Validation, "channel matrix shape does not match alphabet sizes");
  }
  TestChannel c;
  c.kind_ = ChannelKind::DiscretePmf;
  c.nx_ = nx;
  c.nu_ = nu;
  for (std::size_t x = 0; x < nx; ++x) {
    auto row = std::span<const double>(rows).subspan(x * nu, nu);
    check_distribution(row, tolerance, "channel row");
    auto cdf = make_cdf(row);
    c.cdf_.insert(c.cdf_.end(), cdf.begin(), cdf.end());
  }
  c.log_rows_.resize(rows.size());
  std::transform(rows.begin(), rows.end(), c.log_rows_.begin(),
                 [](double p) { return p > 0.0 ? std::log(p) : kNegInf; });
  c.rows_ = std::move(rows);
  return c;
}

TestChannel TestChannel::bsc(double crossover) {
  if (!(crossover >= 0.0 && crossover <= 1.0)) {
    fail(ErrorCode::Validation, "BSC crossover must lie in [0, 1]");
  }
  return discrete(2, 2, {1.0 - crossover, crossover, crossover, 1.0 - crossover});
}

TestChannel TestChannel::gaussian(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    fail(ErrorCode::Validation, "Gaussian test channel needs kappa > 0");
  }
  TestChannel c;
  c.kind_ = ChannelKind::GaussianAdditive;
  c.kappa_ = kappa;
  return c;
}

void TestChannel::require_discrete(std::size_t nx) const {
  if (kind_ != ChannelKind::DiscretePmf) {
    fail(ErrorCode::KindMismatch, "operation needs a discrete test channel");
  }
  if (nx != nx_) {
    fail(ErrorCode::KindMismatch, "channel input alphabet does not match the source");
  }
}

// ---------------------------------------------------------------------------

SamplePair sample_block(const DiscreteJointSource& model, Hypothesis h, std::size_t n,
                        CounterRng& rng) {
  SamplePair out{Sequence(n), Sequence(n)};
  const std::size_t ny = model.ny();
  auto emit = [&](std::size_t t, std::size_t state) {
    out.x[t] = static_cast<Symbol>(state / ny);
    out.y[t] = static_cast<Symbol>(state % ny);
  };
  switch (model.memory()) {
    case Memory::Iid:
      for (std::size_t t = 0; t < n; ++t) emit(t, rng.categorical(model.step_cdf(h)));
      break;
    case Memory::Markov: {
      if (n == 0) break;
      std::size_t state = rng.categorical(model.initial_cdf(h));
      emit(0, state);
      for (std::size_t t = 1; t < n; ++t) {
        state = rng.categorical(model.transition_cdf(h, state));
        emit(t, state);
      }
      break;
    }
    case Memory::Mixture: {
      const std::size_t k = rng.categorical(model.component_weight_cdf());
      for (std::size_t t = 0; t < n; ++t) emit(t, rng.categorical(model.component_cdf(k, h)));
      break;
    }
  }
  return out;
}

double log_joint_prob(const DiscreteJointSource& model, Hypothesis h, SymbolSpan x,
                      SymbolSpan y) {
  check_lengths(x.size(), y.size());
  check_sequence(x, model.nx(), "x");
  check_sequence(y, model.ny(), "y");
  const std::size_t ny = model.ny();
  const std::size_t n = x.size();
  auto iid_sum = [&](std::span<const double> pmf) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double p = pmf[x[t] * ny + y[t]];
      if (p <= 0.0) return kNegInf;
      acc += std::log(p);
    }
    return acc;
  };
  switch (model.memory()) {
    case Memory::Iid:
      return iid_sum(model.step_pmf(h).probs());
    case Memory::Markov: {
      if (n == 0) return 0.0;
      const MarkovLaw& law = model.markov_law(h);
      const std::size_t states = model.states();
      std::size_t prev = x[0] * ny + y[0];
      double p = law.initial[prev];
      if (p <= 0.0) return kNegInf;
      double acc = std::log(p);
      for (std::size_t t = 1; t < n; ++t) {
        const std::size_t cur = x[t] * ny + y[t];
        p = law.transition[prev * states + cur];
        if (p <= 0.0) return kNegInf;
        acc += std::log(p);
        prev = cur;
      }
      return acc;
    }
    case Memory::Mixture: {
      std::vector<double> terms;
      for (const auto& c : model.components()) {
        terms.push_back(std::log(c.weight) +
                        iid_sum(h == Hypothesis::H0 ? c.h0.probs() : c.h1.probs()));
      }
      return log_sum_exp(terms);
    }
  }
  return kNegInf;
}

double log_marginal_x(const DiscreteJointSource& model, Hypothesis h, SymbolSpan x) {
  check_sequence(x, model.nx(), "x");
  const std::size_t nx = model.nx(), ny = model.ny();
  return log_mass(model, h, x.size(), [&](std::size_t t, std::span<double> w) {
    for (std::size_t a = 0; a < nx; ++a)
      for (std::size_t b = 0; b < ny; ++b) w[a * ny + b] = a == x[t] ? 1.0 : 0.0;
  });
}

double log_marginal_y(const DiscreteJointSource& model, Hypothesis h, SymbolSpan y) {
  check_sequence(y, model.ny(), "y");
  const std::size_t nx = model.nx(), ny = model.ny();
  return log_mass(model, h, y.size(), [&](std::size_t t, std::span<double> w) {
    for (std::size_t a = 0; a < nx; ++a)
      for (std::size_t b = 0; b < ny; ++b) w[a * ny + b] = b == y[t] ? 1.0 : 0.0;
  });
}

Sequence apply_test_channel(const TestChannel& channel, SymbolSpan x, CounterRng& rng) {
  if (channel.kind() != ChannelKind::DiscretePmf) {
    fail(ErrorCode::KindMismatch, "Gaussian test channel applied to a discrete sequence");
  }
  check_sequence(x, channel.nx(), "x");
  Sequence u(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    u[t] = static_cast<Symbol>(rng.categorical(channel.row_cdf(x[t])));
  }
  return u;
}

std::vector<double> apply_test_channel(const TestChannel& channel, std::span<const double> x,
                                       CounterRng& rng) {
  if (channel.kind() != ChannelKind::GaussianAdditive) {
    fail(ErrorCode::KindMismatch, "discrete test channel applied to a real-valued sequence");
  }
  const double sd = std::sqrt(channel.kappa());
  std::vector<double> u(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) u[t] = x[t] + sd * rng.normal();
  return u;
}

double log_channel_prob(const TestChannel& channel, SymbolSpan x, SymbolSpan u) {
  check_lengths(x.size(), u.size());
  if (channel.kind() != ChannelKind::DiscretePmf) {
    fail(ErrorCode::Unsupported, "channel likelihood is only defined for discrete channels");
  }
  check_sequence(x, channel.nx(), "x");
  check_sequence(u, channel.nu(), "u");
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) acc += channel.log_prob(u[t], x[t]);
  return acc;
}

namespace {

void require_discrete_pair(const DiscreteJointSource& model, const TestChannel& channel) {
  if (channel.kind() != ChannelKind::DiscretePmf) {
    fail(ErrorCode::Unsupported,
         "exact densities need a discrete channel; Gaussian models use gaussian_tools");
  }
  channel.require_discrete(model.nx());
}

}  // namespace

double log_marginal_u(const DiscreteJointSource& model, const TestChannel& channel,
                      SymbolSpan u, Hypothesis h) {
  require_discrete_pair(model, channel);
  check_sequence(u, channel.nu(), "u");
  const std::size_t nx = model.nx(), ny = model.ny();
  return log_mass(model, h, u.size(), [&](std::size_t t, std::span<double> w) {
    for (std::size_t a = 0; a < nx; ++a) {
      const double p = channel.prob(u[t], a);
      for (std::size_t b = 0; b < ny; ++b) w[a * ny + b] = p;
    }
  });
}

double log_joint_uy(const DiscreteJointSource& model, const TestChannel& channel,
                    SymbolSpan u, SymbolSpan y, Hypothesis h) {
  require_discrete_pair(model, channel);
  check_lengths(u.size(), y.size());
  check_sequence(u, channel.nu(), "u");
  check_sequence(y, model.ny(), "y");
  const std::size_t nx = model.nx(), ny = model.ny();
  return log_mass(model, h, u.size(), [&](std::size_t t, std::span<double> w) {
    for (std::size_t a = 0; a < nx; ++a) {
      const double p = channel.prob(u[t], a);
      for (std::size_t b = 0; b < ny; ++b) w[a * ny + b] = b == y[t] ? p : 0.0;
    }
  });
}

double log_cond_u_given_y(const DiscreteJointSource& model, const TestChannel& channel,
                          SymbolSpan u, SymbolSpan y, Hypothesis h) {
  const double joint = log_joint_uy(model, channel, u, y, h);
  const double marginal = log_marginal_y(model, h, y);
  if (marginal == kNegInf) return kNegInf;
  return joint - marginal;
}

}  // namespace dht

namespace dht {

double CrossCovariance::at(std::ptrdiff_t lag) const noexcept {
  if (lag >= 0) {
    const auto k = static_cast<std::size_t>(lag);
    return k < nonnegative.size() ? nonnegative[k] : 0.0;
  }
  const auto k = static_cast<std::size_t>(-lag);
  if (negative.empty()) return k < nonnegative.size() ? nonnegative[k] : 0.0;
  return k - 1 < negative.size() ? negative[k - 1] : 0.0;
}

std::vector<double> ar1_autocovariance(double rho, double scale, std::size_t max_lag) {
  std::vector<double> acf;
  acf.reserve(max_lag + 1);
  double v = scale;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    if (std::abs(v) < 1e-300) break;
    acf.push_back(v);
    v *= rho;
  }
  return acf;
}

}  // namespace dht
