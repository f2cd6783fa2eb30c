#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dht/rng.hpp"

namespace dht {

enum class Hypothesis { H0, H1 };

constexpr std::size_t index_of(Hypothesis h) noexcept {
  return h == Hypothesis::H0 ? 0 : 1;
}
constexpr Hypothesis other(Hypothesis h) noexcept {
  return h == Hypothesis::H0 ? Hypothesis::H1 : Hypothesis::H0;
}
const char* to_string(Hypothesis h) noexcept;

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;
using SymbolSpan = std::span<const Symbol>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Tolerance for pmf normalisation and marginal agreement of user-supplied
/// models. Models built in code are held to kConstructionTolerance by tests.
inline constexpr double kValidationTolerance = 1e-9;
inline constexpr double kConstructionTolerance = 1e-12;

/// Joint pmf over (x, y), stored row-major as |X| x |Y|.
class JointPmf {
 public:
  JointPmf() = default;
  /// Throws ErrorCode::Validation on bad shape, negative mass, or a total
  /// further than `tolerance` from one.
  JointPmf(std::size_t nx, std::size_t ny, std::vector<double> probs,
           double tolerance = kValidationTolerance);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t cells() const noexcept { return probs_.size(); }
  double operator()(std::size_t x, std::size_t y) const noexcept {
    return probs_[x * ny_ + y];
  }
  std::span<const double> probs() const noexcept { return probs_; }
  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> probs_;
};

enum class Memory { Iid, Markov, Mixture };
const char* to_string(Memory m) noexcept;

/// Markov chain on the pair state s = x * |Y| + y.
struct MarkovLaw {
  std::vector<double> initial;     // |S|
  std::vector<double> transition;  // |S| x |S|, row-stochastic
};

/// One IID law in a mixture; the component is drawn once per sequence.
struct MixtureComponent {
  double weight = 0.0;
  JointPmf h0;
  JointPmf h1;
};

/// Hypothesis-indexed joint law of (X^n, Y^n) over finite alphabets.
///
/// Immutable after construction. Construction checks well-formedness only;
/// whether the marginals agree across hypotheses is a separate question
/// answered by validate_marginals().
class DiscreteJointSource {
 public:
  static DiscreteJointSource iid(JointPmf h0, JointPmf h1);
  static DiscreteJointSource markov(std::size_t nx, std::size_t ny, MarkovLaw h0,
                                    MarkovLaw h1);
  static DiscreteJointSource mixture(std::vector<MixtureComponent> components);

  Memory memory() const noexcept { return memory_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t states() const noexcept { return nx_ * ny_; }

  /// Per-step law: the IID pmf, the stationary law of the Markov chain, or
  /// the weight-averaged mixture pmf.
  const JointPmf& step_pmf(Hypothesis h) const noexcept { return step_[index_of(h)]; }
  const MarkovLaw& markov_law(Hypothesis h) const noexcept { return markov_[index_of(h)]; }
  std::span<const MixtureComponent> components() const noexcept { return components_; }

  /// Same law with the hypothesis labels exchanged.
  DiscreteJointSource swapped() const;

  // Sampling tables; cdf over the pair state.
  std::span<const double> step_cdf(Hypothesis h) const noexcept { return step_cdf_[index_of(h)]; }
  std::span<const double> initial_cdf(Hypothesis h) const noexcept { return init_cdf_[index_of(h)]; }
  std::span<const double> transition_cdf(Hypothesis h, std::size_t state) const noexcept {
    return std::span<const double>(trans_cdf_[index_of(h)]).subspan(state * states(), states());
  }
  std::span<const double> component_cdf(std::size_t k, Hypothesis h) const noexcept {
    return comp_cdf_[index_of(h)][k];
  }
  std::span<const double> component_weight_cdf() const noexcept { return weight_cdf_; }

 private:
  DiscreteJointSource() = default;
  void build_tables();

  Memory memory_ = Memory::Iid;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  JointPmf step_[2];
  MarkovLaw markov_[2];
  std::vector<MixtureComponent> components_;

  std::vector<double> step_cdf_[2];
  std::vector<double> init_cdf_[2];
  std::vector<double> trans_cdf_[2];
  std::vector<std::vector<double>> comp_cdf_[2];
  std::vector<double> weight_cdf_;
};

/// Stationary law of a row-stochastic kernel (eigenvector of the transpose
/// for the eigenvalue closest to one, normalised to a pmf).
std::vector<double> stationary_distribution(std::span<const double> transition,
                                            std::size_t states);

/// I.i.d. sequence of (M, N)-dimensional super-symbols. Reduces to a
/// DiscreteJointSource over the product alphabets.
class BlockIidSource {
 public:
  BlockIidSource(std::size_t block_x, std::size_t block_y, std::size_t base_x,
                 std::size_t base_y, JointPmf block_h0, JointPmf block_h1);

  std::size_t block_x() const noexcept { return m_; }
  std::size_t block_y() const noexcept { return n_; }
  DiscreteJointSource reduce() const;

  /// Index of a block of base-`base` digits, most significant first.
  static Symbol pack(SymbolSpan block, std::size_t base);
  static Sequence unpack(Symbol super, std::size_t length, std::size_t base);

 private:
  std::size_t m_, n_, base_x_, base_y_;
  JointPmf h0_, h1_;
};

/// Cross-covariance generator c(k) = Cov(X_i, Y_{i+k}). An empty
/// `negative` list means c(-k) = c(k).
struct CrossCovariance {
  std::vector<double> nonnegative;  // c(0), c(1), ...
  std::vector<double> negative;     // c(-1), c(-2), ...

  double at(std::ptrdiff_t lag) const noexcept;
};

/// A stationary Gaussian pair whose marginal laws (acf and mean) are shared
/// by both hypotheses; only the cross-covariance depends on the hypothesis.
/// Consumed analytically by gaussian_tools; there is no sampling path.
struct GaussianJointSource {
  // Autocovariances c(0), c(1), ...; lags past the end are 0.
  std::vector<double> acf_x;
  std::vector<double> acf_y;
  CrossCovariance ccf_h0;
  CrossCovariance ccf_h1;
  double mean_x = 0.0;
  double mean_y = 0.0;
  // Mean offsets applied under H1 only. Nonzero values contradict the
  // hypothesis-independent marginals and are reported as a warning.
  double mean_shift_x_h1 = 0.0;
  double mean_shift_y_h1 = 0.0;

  const CrossCovariance& ccf(Hypothesis h) const noexcept {
    return h == Hypothesis::H0 ? ccf_h0 : ccf_h1;
  }
};

/// acf c(k) = scale * rho^|k| truncated where it drops below 1e-300.
std::vector<double> ar1_autocovariance(double rho, double scale, std::size_t max_lag);

// ---------------------------------------------------------------------------
// Marginal validation

struct MarginalViolation {
  char axis = 'X';            // 'X' or 'Y'
  std::size_t symbol = 0;
  double deviation = 0.0;
  std::ptrdiff_t component = -1;  // mixture component, -1 for the whole law
};

struct MarginalReport {
  bool ok = true;
  double max_deviation = 0.0;
  std::vector<MarginalViolation> violations;
};

/// Compares the X and Y marginals (stationary marginals for Markov memory,
/// per-component marginals for mixtures) across hypotheses.
MarginalReport validate_marginals(const DiscreteJointSource& model,
                                  double tolerance = kValidationTolerance);
/// Throws ErrorCode::MarginalMismatch naming the worst symbol.
void require_equal_marginals(const DiscreteJointSource& model,
                             double tolerance = kValidationTolerance);

// ---------------------------------------------------------------------------
// Test channel

enum class ChannelKind { DiscretePmf, GaussianAdditive };

class TestChannel {
 public:
  /// Row-major |X| x |U| conditional pmf.
  static TestChannel discrete(std::size_t nx, std::size_t nu, std::vector<double> rows,
                              double tolerance = kValidationTolerance);
  static TestChannel bsc(double crossover);
  static TestChannel gaussian(double kappa);

  ChannelKind kind() const noexcept { return kind_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t nu() const noexcept { return nu_; }
  double prob(std::size_t u, std::size_t x) const noexcept { return rows_[x * nu_ + u]; }
  double log_prob(std::size_t u, std::size_t x) const noexcept { return log_rows_[x * nu_ + u]; }
  double kappa() const noexcept { return kappa_; }
  std::span<const double> row_cdf(std::size_t x) const noexcept {
    return std::span<const double>(cdf_).subspan(x * nu_, nu_);
  }

  /// Throws KindMismatch unless this is a discrete channel over |X| = nx.
  void require_discrete(std::size_t nx) const;

 private:
  TestChannel() = default;
  ChannelKind kind_ = ChannelKind::DiscretePmf;
  std::size_t nx_ = 0;
  std::size_t nu_ = 0;
  std::vector<double> rows_;
  std::vector<double> log_rows_;
  std::vector<double> cdf_;
  double kappa_ = 0.0;
};

// ---------------------------------------------------------------------------
// Sampling and exact evaluation. All log-probabilities are natural logs;
// a zero-probability event yields kNegInf.

struct SamplePair {
  Sequence x;
  Sequence y;
};

SamplePair sample_block(const DiscreteJointSource& model, Hypothesis h, std::size_t n,
                        CounterRng& rng);

double log_joint_prob(const DiscreteJointSource& model, Hypothesis h, SymbolSpan x,
                      SymbolSpan y);
double log_marginal_x(const DiscreteJointSource& model, Hypothesis h, SymbolSpan x);
double log_marginal_y(const DiscreteJointSource& model, Hypothesis h, SymbolSpan y);

Sequence apply_test_channel(const TestChannel& channel, SymbolSpan x, CounterRng& rng);
std::vector<double> apply_test_channel(const TestChannel& channel, std::span<const double> x,
                                       CounterRng& rng);

/// log P_{U^n|X^n}(u | x) for a memoryless channel.
double log_channel_prob(const TestChannel& channel, SymbolSpan x, SymbolSpan u);

/// log P_{U^n}(u) with X marginalised under `h` (H0 by default; the two
/// agree for models with hypothesis-independent X laws).
double log_marginal_u(const DiscreteJointSource& model, const TestChannel& channel,
                      SymbolSpan u, Hypothesis h = Hypothesis::H0);
double log_joint_uy(const DiscreteJointSource& model, const TestChannel& channel,
                    SymbolSpan u, SymbolSpan y, Hypothesis h);
double log_cond_u_given_y(const DiscreteJointSource& model, const TestChannel& channel,
                          SymbolSpan u, SymbolSpan y, Hypothesis h);

/// Numerically safe log(exp(a) + exp(b)).
double log_add(double a, double b) noexcept;

}  // namespace dht
