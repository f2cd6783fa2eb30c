#pragma once

// Models and independent oracles shared by the unit tests and the acceptance
// runner. Oracles deliberately avoid the library's evaluation code: they work
// from entropies, explicit enumeration and closed forms.

#include <cmath>
#include <functional>
#include <vector>

#include "dht/rng.hpp"
#include "dht/source_models.hpp"

namespace fixtures {

using dht::DiscreteJointSource;
using dht::JointPmf;
using dht::TestChannel;

inline JointPmf dsbs_pmf(double p) {
  return JointPmf(2, 2, {0.5 * (1 - p), 0.5 * p, 0.5 * p, 0.5 * (1 - p)});
}

/// Uniform X, Y = X xor Bern(p0) under H0 and Bern(p1) under H1.
inline DiscreteJointSource dsbs(double p0 = 0.1, double p1 = 0.5) {
  return DiscreteJointSource::iid(dsbs_pmf(p0), dsbs_pmf(p1));
}

inline DiscreteJointSource dsbs_markov(double stay, double p0, double p1) {
  // X is a symmetric binary chain; Y_t = X_t xor Bern(p_h) independently.
  auto law = [&](double p) {
    dht::MarkovLaw m;
    m.initial.resize(4);
    m.transition.resize(16);
    for (int s = 0; s < 4; ++s) {
      const int x = s / 2, y = s % 2;
      m.initial[s] = 0.5 * (x == y ? 1 - p : p);
      for (int t = 0; t < 4; ++t) {
        const int x2 = t / 2, y2 = t % 2;
        (void)y;
        m.transition[s * 4 + t] = (x2 == x ? stay : 1 - stay) * (x2 == y2 ? 1 - p : p);
      }
    }
    return m;
  };
  return DiscreteJointSource::markov(2, 2, law(p0), law(p1));
}

// ---------------------------------------------------------------------------
// Entropy-based oracles

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

inline double binary_entropy(double p) { return entropy({p, 1.0 - p}); }

/// I(A;B) = H(A) + H(B) - H(A,B) of a row-major |A| x |B| table.
inline double mutual_information(const std::vector<double>& joint, std::size_t na,
                                 std::size_t nb) {
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      pa[a] += joint[a * nb + b];
      pb[b] += joint[a * nb + b];
    }
  }
  return entropy(pa) + entropy(pb) - entropy(joint);
}

/// KL(p || q) = -H(p) - sum p log q.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double cross = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) cross -= p[i] * std::log(q[i]);
  }
  return cross - entropy(p);
}

struct PerSymbol {
  double i_xu, i_uy, divergence;
};

/// Enumerates P(x,u), P_h(u,y) cell by cell for an IID model.
inline PerSymbol per_symbol_oracle(const std::vector<double>& p0, const std::vector<double>& p1,
                                   std::size_t nx, std::size_t ny,
                                   const std::vector<double>& w, std::size_t nu) {
  std::vector<double> pxu(nx * nu, 0.0), puy0(nu * ny, 0.0), puy1(nu * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t u = 0; u < nu; ++u) {
        const double c = w[x * nu + u];
        pxu[x * nu + u] += p0[x * ny + y] * c;
        puy0[u * ny + y] += p0[x * ny + y] * c;
        puy1[u * ny + y] += p1[x * ny + y] * c;
      }
    }
  }
  return {mutual_information(pxu, nx, nu), mutual_information(puy0, nu, ny), kl(puy0, puy1)};
}

inline std::vector<double> bsc_rows(double q) { return {1 - q, q, q, 1 - q}; }

// ---------------------------------------------------------------------------
// Brute-force path sums over all sequences of a finite alphabet

/// Calls f(seq) for every sequence in [0, base)^n.
inline void for_each_sequence(std::size_t base, std::size_t n,
                              const std::function<void(const std::vector<dht::Symbol>&)>& f) {
  std::vector<dht::Symbol> s(n, 0);
  while (true) {
    f(s);
    std::size_t i = 0;
    while (i < n && ++s[i] == base) s[i++] = 0;
    if (i == n) return;
  }
}

/// P(x^n, y^n) straight from the Markov kernel.
inline double markov_path_prob(const dht::MarkovLaw& law, std::size_t ny,
                               const std::vector<dht::Symbol>& x,
                               const std::vector<dht::Symbol>& y) {
  const std::size_t states = law.initial.size();
  std::size_t prev = x[0] * ny + y[0];
  double p = law.initial[prev];
  for (std::size_t t = 1; t < x.size(); ++t) {
    const std::size_t s = x[t] * ny + y[t];
    p *= law.transition[prev * states + s];
    prev = s;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Gaussian closed forms

/// KL(N(0, A) || N(0, B)) for 2x2 covariances, by explicit inverse.
inline double gaussian_kl_2x2(double a11, double a12, double a22, double b11, double b12,
                              double b22) {
  const double det_a = a11 * a22 - a12 * a12;
  const double det_b = b11 * b22 - b12 * b12;
  const double i11 = b22 / det_b, i12 = -b12 / det_b, i22 = b11 / det_b;
  const double trace = i11 * a11 + 2 * i12 * a12 + i22 * a22;
  return 0.5 * (trace - 2.0 + std::log(det_b / det_a));
}

// ---------------------------------------------------------------------------
// Marginal validator fixtures: ten consistent models, ten violations.

inline std::vector<double> product(const std::vector<double>& px, const std::vector<double>& py) {
  std::vector<double> out;
  for (double a : px) {
    for (double b : py) out.push_back(a * b);
  }
  return out;
}

inline std::vector<DiscreteJointSource> valid_marginal_models() {
  std::vector<DiscreteJointSource> out;
  out.push_back(dsbs(0.1, 0.5));
  out.push_back(dsbs(0.2, 0.3));
  out.push_back(dsbs(0.0, 1.0));
  // Ternary: H1 is the product of H0's marginals.
  const std::vector<double> t0 = {0.2, 0.05, 0.05, 0.05, 0.3, 0.05, 0.0, 0.05, 0.25};
  out.push_back(DiscreteJointSource::iid(JointPmf(3, 3, t0),
                                         JointPmf(3, 3, product({0.3, 0.4, 0.3}, {0.25, 0.4, 0.35}))));
  // Rectangular 2 x 3 with a different coupling of the same marginals.
  out.push_back(DiscreteJointSource::iid(JointPmf(2, 3, {0.3, 0.1, 0.0, 0.0, 0.2, 0.4}),
                                         JointPmf(2, 3, {0.1, 0.1, 0.2, 0.2, 0.2, 0.2})));
  out.push_back(DiscreteJointSource::iid(JointPmf(1, 2, {0.5, 0.5}), JointPmf(1, 2, {0.5, 0.5})));
  out.push_back(dsbs_markov(0.9, 0.1, 0.5));
  out.push_back(dsbs_markov(0.6, 0.25, 0.4));
  out.push_back(DiscreteJointSource::mixture(
      {{0.5, dsbs_pmf(0.1), dsbs_pmf(0.5)},
       {0.5, JointPmf(2, 2, {0.09, 0.01, 0.09, 0.81}),
        JointPmf(2, 2, product({0.1, 0.9}, {0.18, 0.82}))}}));
  out.push_back(DiscreteJointSource::mixture(
      {{0.3, dsbs_pmf(0.2), dsbs_pmf(0.4)}, {0.7, dsbs_pmf(0.05), dsbs_pmf(0.45)}}));
  return out;
}

inline std::vector<DiscreteJointSource> invalid_marginal_models() {
  std::vector<DiscreteJointSource> out;
  // P(Y=1) = 0.6 under H1 against 0.5 under H0.
  out.push_back(DiscreteJointSource::iid(dsbs_pmf(0.1), JointPmf(2, 2, {0.2, 0.3, 0.2, 0.3})));
  // X marginal shifted.
  out.push_back(DiscreteJointSource::iid(dsbs_pmf(0.1), JointPmf(2, 2, {0.3, 0.3, 0.2, 0.2})));
  // Tiny shift, well above tolerance.
  out.push_back(DiscreteJointSource::iid(dsbs_pmf(0.1),
                                         JointPmf(2, 2, {0.2505, 0.25, 0.2495, 0.25})));
  // Ternary, one symbol moved.
  out.push_back(DiscreteJointSource::iid(
      JointPmf(3, 3, product({0.3, 0.4, 0.3}, {0.25, 0.4, 0.35})),
      JointPmf(3, 3, product({0.3, 0.4, 0.3}, {0.25, 0.35, 0.4}))));
  out.push_back(DiscreteJointSource::iid(JointPmf(2, 3, {0.3, 0.1, 0.0, 0.0, 0.2, 0.4}),
                                         JointPmf(2, 3, {0.1, 0.2, 0.1, 0.2, 0.2, 0.2})));
  out.push_back(DiscreteJointSource::iid(JointPmf(1, 2, {0.5, 0.5}), JointPmf(1, 2, {0.4, 0.6})));
  // Markov: H1 chain with a biased X kernel.
  {
    const DiscreteJointSource base = dsbs_markov(0.9, 0.1, 0.5);
    dht::MarkovLaw h1 = base.markov_law(dht::Hypothesis::H1);
    for (int s = 0; s < 4; ++s) {
      // Leaving X=1 slightly less often than leaving X=0.
      const int x = s / 2;
      for (int t = 0; t < 4; ++t) {
        const int x2 = t / 2;
        const double stay = x == 1 ? 0.901 : 0.9;
        h1.transition[s * 4 + t] = (x2 == x ? stay : 1 - stay) * 0.5;
      }
    }
    out.push_back(DiscreteJointSource::markov(2, 2, base.markov_law(dht::Hypothesis::H0), h1));
  }
  {
    const DiscreteJointSource base = dsbs_markov(0.6, 0.25, 0.4);
    dht::MarkovLaw h1 = base.markov_law(dht::Hypothesis::H1);
    for (int s = 0; s < 4; ++s) {
      for (int t = 0; t < 4; ++t) {
        const int x = s / 2, x2 = t / 2, y2 = t % 2;
        h1.transition[s * 4 + t] = (x2 == x ? 0.6 : 0.4) * (y2 == 1 ? 0.7 : 0.3);
      }
    }
    out.push_back(DiscreteJointSource::markov(2, 2, base.markov_law(dht::Hypothesis::H0), h1));
  }
  // Mixture whose overall marginals agree but one component's do not.
  out.push_back(DiscreteJointSource::mixture(
      {{0.5, dsbs_pmf(0.1), JointPmf(2, 2, {0.3, 0.3, 0.2, 0.2})},
       {0.5, dsbs_pmf(0.1), JointPmf(2, 2, {0.2, 0.2, 0.3, 0.3})}}));
  out.push_back(DiscreteJointSource::mixture(
      {{0.3, dsbs_pmf(0.2), dsbs_pmf(0.4)},
       {0.7, dsbs_pmf(0.05), JointPmf(2, 2, {0.3, 0.25, 0.2, 0.25})}}));
  return out;
}

}  // namespace fixtures
