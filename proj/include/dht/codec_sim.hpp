#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dht/exponent_calc.hpp"
#include "dht/source_models.hpp"

namespace dht {

inline constexpr std::uint64_t kDefaultCodebookCap = std::uint64_t{1} << 20;

/// ceil(e^{n * rate}), saturating at 2^63. Values within 1e-9 (relative) of
/// an integer round to it, so e^{4 ln 2} is 16 and not 17.
std::uint64_t codebook_size(double rate, std::size_t n);

/// Random codebook: M1 codewords drawn i.i.d. from P_{U^n} under H0, each
/// thrown into one of M2 bins uniformly. Codeword i and its bin come from
/// their own substreams of `seed`, so the book is rebuildable from the seed.
struct Codebook {
  std::size_t n = 0;
  std::uint64_t m1 = 0;
  std::uint64_t m2 = 0;
  std::uint64_t seed = 0;
  std::vector<Symbol> words;          // m1 * n
  std::vector<std::uint64_t> bin_of;  // m1
  std::vector<double> log_pu;         // log P_{U^n}(codeword), m1
  std::vector<std::pair<std::uint64_t, std::uint32_t>> by_bin;  // sorted (bin, index)

  SymbolSpan codeword(std::size_t i) const noexcept {
    return SymbolSpan(words).subspan(i * n, n);
  }
  /// Codeword indices in `bin`, ascending.
  std::vector<std::uint32_t> bin_members(std::uint64_t bin) const;
  /// M2 > M1: more bins than codewords (allowed, but usually a misconfiguration).
  bool more_bins_than_codewords() const noexcept { return m2 > m1; }
};

/// Model, channel and the per-symbol log tables the codec needs.
class CodecContext {
 public:
  CodecContext(DiscreteJointSource model, TestChannel channel);

  const DiscreteJointSource& model() const noexcept { return model_; }
  const TestChannel& channel() const noexcept { return channel_; }

  double log_channel(SymbolSpan x, SymbolSpan u) const;
  double log_marginal_u(SymbolSpan u) const;
  double log_joint_uy(SymbolSpan u, SymbolSpan y, Hypothesis h) const;
  double log_marginal_y(SymbolSpan y) const;

 private:
  DiscreteJointSource model_;
  TestChannel channel_;
  bool iid_ = false;
  std::vector<double> log_pu_;       // per-symbol, IID only
  std::vector<double> log_puy_[2];   // per-symbol |U| x |Y|, IID only
  std::vector<double> log_py_;       // per-symbol, IID only
};

/// Throws CodebookTooLarge when M1 exceeds `cap`.
Codebook build_codebook(const CodecContext& ctx, std::size_t n, const CodecParams& params,
                        std::uint64_t seed, std::uint64_t cap = kDefaultCodebookCap);
Codebook build_codebook(const DiscreteJointSource& model, const TestChannel& channel,
                        std::size_t n, const CodecParams& params, std::uint64_t seed,
                        std::uint64_t cap = kDefaultCodebookCap);

/// Audit format: a "# codebook ..." header, then one line per codeword
/// holding its space-separated symbols, a tab, and its bin index.
void write_codebook(std::ostream& os, const Codebook& cb);

struct EncodeResult {
  bool sent = false;  // false: the encoder sent an error message
  std::uint64_t bin = 0;
  std::uint32_t codeword = 0;
};

/// Among codewords in T1, i.e. r0_lower - eps < (1/n) log P(u|x)/P_U(u) <
/// r0_upper + eps, picks the largest log P(u|x), lowest index on ties.
EncodeResult encode(SymbolSpan x, const Codebook& cb, const CodecContext& ctx,
                    const CodecParams& params);

struct DecodeResult {
  Hypothesis decision = Hypothesis::H1;
  std::optional<std::uint32_t> debinned;
  bool t2_pass = false;
  bool an_pass = false;
};

/// Scans the bin in index order; the first codeword with
/// (1/n) log P(u|y)/P_U(u) > r' - eps is debinned, and H0 is declared iff it
/// also satisfies (1/n) log P_H0(u,y)/P_H1(u,y) > S - eps. Never reads x.
DecodeResult decode(const EncodeResult& message, SymbolSpan y, const Codebook& cb,
                    const CodecContext& ctx, const CodecParams& params);

/// T2 and A_n membership of one codeword against y.
bool in_t2(std::size_t codeword, SymbolSpan y, double log_py, const Codebook& cb,
           const CodecContext& ctx, const CodecParams& params);
bool in_acceptance_region(std::size_t codeword, SymbolSpan y, const Codebook& cb,
                          const CodecContext& ctx, const CodecParams& params);

enum class ErrorEvent { Correct, E11, E12, E21, E22 };
const char* to_string(ErrorEvent e) noexcept;

struct TrialTrace {
  Hypothesis hypothesis = Hypothesis::H0;
  bool sent = false;
  std::uint64_t bin = 0;
  std::optional<std::uint32_t> chosen;
  std::optional<std::uint32_t> debinned;
  bool t2_pass = false;
  bool an_pass = false;
  Hypothesis decision = Hypothesis::H1;
  ErrorEvent event = ErrorEvent::Correct;
  // The encoder's own codeword tested against y, whatever the decoder did.
  bool chosen_in_t2 = false;
  bool chosen_in_an = false;
};

/// Tags a complete trace with exactly one event; debinning mismatch is
/// checked first. Throws InconsistentTrace when flags contradict each other.
ErrorEvent classify_event(const TrialTrace& trace);

/// One full trial: draw (x, y) under `h`, encode, decode, classify.
TrialTrace run_trial(const Codebook& cb, const CodecContext& ctx, const CodecParams& params,
                     Hypothesis h, CounterRng& rng);

}  // namespace dht
