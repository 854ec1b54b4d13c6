#pragma once

#include <Eigen/Dense>

namespace rctmiss {

struct LsFit {
  Eigen::VectorXd coefficients;  // intercept first when the design carries one
  Eigen::VectorXd residuals;
  bool rank_ok = false;
};

// Least squares through a column-pivoted Householder QR. Pivots below
// 1e-10 times the largest pivot count as zero; a numerical rank below the
// column count sets rank_ok = false instead of throwing, so the caller can
// decide how to recover.
LsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Sample covariance with the m-1 denominator. Throws on length mismatch or
// fewer than two observations.
double sample_cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double sample_var(const Eigen::VectorXd& a);

// Pairwise sample covariances of the columns; exactly symmetric because each
// off-diagonal entry is computed once and mirrored.
Eigen::MatrixXd sample_cov_matrix(const Eigen::MatrixXd& columns);

}  // namespace rctmiss
