#include "rctmiss/linalg.hpp"

#include <stdexcept>

namespace rctmiss {

LsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  const Eigen::Index m = design.rows();
  const Eigen::Index p = design.cols();
  if (response.size() != m) {
    throw std::invalid_argument("ols: design and response row counts differ");
  }
  if (m < p) {
    throw std::invalid_argument("ols: fewer rows than columns");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  LsFit fit;
  fit.coefficients = qr.solve(response);
  fit.residuals = response - design * fit.coefficients;
  fit.rank_ok = qr.rank() == p;
  return fit;
}

double sample_cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.size();
  if (b.size() != m) {
    throw std::invalid_argument("sample_cov: sequences have different lengths");
  }
  if (m < 2) {
    throw std::invalid_argument("sample_cov: need at least 2 observations");
  }
  const double am = a.mean();
  const double bm = b.mean();
  double acc = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    acc += (a[i] - am) * (b[i] - bm);
  }
  return acc / static_cast<double>(m - 1);
}

double sample_var(const Eigen::VectorXd& a) { return sample_cov(a, a); }

Eigen::MatrixXd sample_cov_matrix(const Eigen::MatrixXd& columns) {
  const Eigen::Index m = columns.rows();
  const Eigen::Index p = columns.cols();
  if (m < 2) {
    throw std::invalid_argument("sample_cov_matrix: need at least 2 rows");
  }
  Eigen::MatrixXd centered = columns.rowwise() - columns.colwise().mean();
  Eigen::MatrixXd out(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index l = 0; l <= j; ++l) {
      const double v = centered.col(j).dot(centered.col(l)) / static_cast<double>(m - 1);
      out(j, l) = v;
      out(l, j) = v;
    }
  }
  return out;
}

}  // namespace rctmiss
