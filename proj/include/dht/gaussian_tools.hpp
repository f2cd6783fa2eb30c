#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dht/source_models.hpp"

namespace dht {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric Toeplitz matrix T(i, j) = acf(|i - j|).
Matrix toeplitz(std::span<const double> acf, std::size_t n);
/// K_XY(i, j) = Cov(X_i, Y_j) = c(j - i).
Matrix cross_toeplitz(const CrossCovariance& ccf, std::size_t n);

struct JointCov {
  std::size_t n = 0;
  Matrix kx, ky, kxy;

  /// [[K_X, K_XY], [K_XY^T, K_Y]].
  Matrix assembled() const;
};

JointCov joint_cov(const GaussianJointSource& src, std::size_t n, Hypothesis h);

/// Checks, at blocklength n, that K_X and K_Y are SPD and that both
/// assembled joint covariances are symmetric positive definite. Returns
/// warnings (currently: a nonzero H1 mean shift).
std::vector<std::string> validate_gaussian_source(const GaussianJointSource& src, std::size_t n);

/// Mean of (U^n, Y^n) under H1 minus under H0; U = X + Z shares X's mean.
Vector uy_mean_difference(const GaussianJointSource& src, std::size_t n);

struct ConditionalCov {
  Matrix matrix;       // K_X - K_XY K_Y^{-1} K_YX, symmetrised
  Vector eigenvalues;  // ascending
};

/// Throws SingularMatrix when K_Y is not SPD and NonPositiveResult when the
/// Schur complement loses positive definiteness numerically.
ConditionalCov conditional_cov(const JointCov& jc);

/// (1/2n) sum_i ln((lambda_i + kappa) / kappa) over the eigenvalues of an SPD
/// conditional covariance. Throws NonSpd.
double entropy_rate_diff_term(const Matrix& k_cond, double kappa);
double entropy_rate_diff_term(std::span<const double> eigenvalues, double kappa);

/// Joint covariances of (U, Y) with U = X + Z, Z ~ N(0, kappa I).
struct UyCov {
  std::size_t n = 0;
  Matrix sigma;      // H0
  Matrix sigma_bar;  // H1
};

UyCov uy_cov(const JointCov& h0, const JointCov& h1, double kappa);

/// ln|A| for SPD A via Cholesky; throws NonSpd.
double log_det_spd(const Matrix& a);

/// (1/2n)[ln|S1| - ln|S0| - 2n + d^T S1^{-1} d + tr(S1^{-1} S0)], i.e. the
/// Gaussian KL divergence per symbol with S0 = Sigma, S1 = SigmaBar.
/// Throws SingularMatrix when SigmaBar is not SPD.
double gauss_divergence_term(const UyCov& uy, const Vector& mu_diff);
double gauss_divergence_term(const UyCov& uy);

struct LimitTrace {
  std::vector<std::size_t> n;
  std::vector<double> values;
  bool converged = false;
  double final_gap = 0.0;  // |v_last - v_prev|, 0 for a single point
};

/// Evaluates a per-n normalised term on an increasing n_list. Converged iff
/// the last two values differ by less than `tolerance` (never for one point).
LimitTrace limit_sequence(const std::function<double(std::size_t)>& term,
                          std::span<const std::size_t> n_list, double tolerance = 1e-3);

}  // namespace dht
