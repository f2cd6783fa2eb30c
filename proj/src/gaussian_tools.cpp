#include "dht/gaussian_tools.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "dht/errors.hpp"

namespace dht {

Matrix toeplitz(std::span<const double> acf, std::size_t n) {
  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t lag = i > j ? i - j : j - i;
      t(i, j) = lag < acf.size() ? acf[lag] : 0.0;
    }
  }
  return t;
}

Matrix cross_toeplitz(const CrossCovariance& ccf, std::size_t n) {
  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      t(i, j) = ccf.at(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i));
    }
  }
  return t;
}

Matrix JointCov::assembled() const {
  Matrix k(2 * n, 2 * n);
  k.topLeftCorner(n, n) = kx;
  k.topRightCorner(n, n) = kxy;
  k.bottomLeftCorner(n, n) = kxy.transpose();
  k.bottomRightCorner(n, n) = ky;
  return k;
}

JointCov joint_cov(const GaussianJointSource& src, std::size_t n, Hypothesis h) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "blocklength must be positive");
  return JointCov{n, toeplitz(src.acf_x, n), toeplitz(src.acf_y, n),
                  cross_toeplitz(src.ccf(h), n)};
}

namespace {

bool is_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

}  // namespace

std::vector<std::string> validate_gaussian_source(const GaussianJointSource& src,
                                                  std::size_t n) {
  if (src.acf_x.empty() || src.acf_y.empty()) {
    fail(ErrorCode::Validation, "autocovariance sequences must be nonempty");
  }
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    const JointCov jc = joint_cov(src, n, h);
    if (!is_spd(jc.kx)) fail(ErrorCode::Validation, "K_X is not positive definite");
    if (!is_spd(jc.ky)) fail(ErrorCode::Validation, "K_Y is not positive definite");
    const Matrix k = jc.assembled();
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      fail(ErrorCode::Validation, "joint covariance is not symmetric");
    }
    if (!is_spd(k)) {
      std::ostringstream os;
      os << "joint covariance under " << to_string(h) << " is not positive definite at n=" << n;
      fail(ErrorCode::Validation, os.str());
    }
  }
  std::vector<std::string> warnings;
  if (src.mean_shift_x_h1 != 0.0 || src.mean_shift_y_h1 != 0.0) {
    warnings.emplace_back(
        "nonzero H1 mean shift: marginals of X and Y then depend on the hypothesis");
  }
  return warnings;
}

Vector uy_mean_difference(const GaussianJointSource& src, std::size_t n) {
  Vector d(2 * n);
  d.head(n).setConstant(src.mean_shift_x_h1);
  d.tail(n).setConstant(src.mean_shift_y_h1);
  return d;
}

ConditionalCov conditional_cov(const JointCov& jc) {
  Eigen::LLT<Matrix> ky(jc.ky);
  if (ky.info() != Eigen::Success) {
    fail(ErrorCode::SingularMatrix, "K_Y is singular or not positive definite");
  }
  Matrix schur = jc.kx - jc.kxy * ky.solve(jc.kxy.transpose());
  schur = 0.5 * (schur + schur.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(schur, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    fail(ErrorCode::NonPositiveResult, "conditional covariance is not positive definite");
  }
  return ConditionalCov{std::move(schur), eig.eigenvalues()};
}

double entropy_rate_diff_term(std::span<const double> eigenvalues, double kappa) {
  if (!(kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa must be positive");
  if (eigenvalues.empty()) fail(ErrorCode::InvalidArgument, "no eigenvalues");
  double acc = 0.0;
  for (double lambda : eigenvalues) {
    if (!(lambda > 0.0)) fail(ErrorCode::NonSpd, "conditional covariance is not SPD");
    acc += std::log1p(lambda / kappa);
  }
  return acc / (2.0 * static_cast<double>(eigenvalues.size()));
}

double entropy_rate_diff_term(const Matrix& k_cond, double kappa) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k_cond, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) fail(ErrorCode::NonSpd, "eigen-decomposition failed");
  const Vector& ev = eig.eigenvalues();
  return entropy_rate_diff_term(std::span<const double>(ev.data(), ev.size()), kappa);
}

UyCov uy_cov(const JointCov& h0, const JointCov& h1, double kappa) {
  if (!(kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa must be positive");
  if (h0.n != h1.n) fail(ErrorCode::InvalidArgument, "blocklengths differ");
  const std::size_t n = h0.n;
  auto build = [&](const JointCov& jc) {
    JointCov uy{n, jc.kx + kappa * Matrix::Identity(n, n), jc.ky, jc.kxy};
    return uy.assembled();
  };
  return UyCov{n, build(h0), build(h1)};
}

double log_det_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NonSpd, "matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double gauss_divergence_term(const UyCov& uy, const Vector& mu_diff) {
  const auto dim = uy.sigma_bar.rows();
  if (mu_diff.size() != dim) fail(ErrorCode::InvalidArgument, "mean difference has wrong length");
  Eigen::LLT<Matrix> bar(uy.sigma_bar);
  if (bar.info() != Eigen::Success) {
    fail(ErrorCode::SingularMatrix, "SigmaBar is singular or not positive definite");
  }
  const double log_det_bar = 2.0 * bar.matrixLLT().diagonal().array().log().sum();
  const double log_det = log_det_spd(uy.sigma);
  const double trace = bar.solve(uy.sigma).trace();
  const double quad = mu_diff.dot(bar.solve(mu_diff));
  const double d = static_cast<double>(dim);
  return (log_det_bar - log_det - d + quad + trace) / d;
}

double gauss_divergence_term(const UyCov& uy) {
  return gauss_divergence_term(uy, Vector::Zero(uy.sigma_bar.rows()));
}

LimitTrace limit_sequence(const std::function<double(std::size_t)>& term,
                          std::span<const std::size_t> n_list, double tolerance) {
  LimitTrace trace;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (i > 0 && n_list[i] <= n_list[i - 1]) {
      fail(ErrorCode::InvalidArgument, "n_list must be strictly increasing");
    }
    trace.n.push_back(n_list[i]);
    trace.values.push_back(term(n_list[i]));
  }
  if (trace.values.size() >= 2) {
    const std::size_t last = trace.values.size() - 1;
    trace.final_gap = std::abs(trace.values[last] - trace.values[last - 1]);
    trace.converged = trace.final_gap < tolerance;
  }
  return trace;
}

}  // namespace dht
