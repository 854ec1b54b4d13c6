#include "rctmiss/variance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rctmiss/linalg.hpp"

namespace rctmiss {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// Sample moments of the stored covariates x (zero where masked), the
// missingness m = 1 - r, and optionally the outcome, over one block of rows.
// The imputed covariate x + diag-scaled m is affine in the imputation vector,
// so every imputed moment is a closed form in these tables.
struct BlockMoments {
  Eigen::Index count = 0;
  Eigen::VectorXd xbar, mbar;
  Eigen::MatrixXd Sxx, Sxm, Smm;  // Sxm(j, l) = cov(x_j, m_l)
  double ybar = 0, yvar = 0;
  Eigen::VectorXd sxy, smy;
};

void fill_symmetric(const Eigen::MatrixXd& centered, double denom, Eigen::MatrixXd& out) {
  const Eigen::Index p = centered.cols();
  out.resize(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index l = 0; l <= j; ++l) {
      const double v = centered.col(j).dot(centered.col(l)) / denom;
      out(j, l) = v;
      out(l, j) = v;
    }
  }
}

BlockMoments block_moments(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                           const Eigen::VectorXd* y) {
  const Eigen::Index m = x.rows();
  if (m < 2) {
    throw NumericalError("variance: need at least 2 subjects in every arm");
  }
  BlockMoments b;
  b.count = m;
  const double denom = static_cast<double>(m - 1);
  const Eigen::MatrixXd miss = (1.0 - r.array()).matrix();
  b.xbar = x.colwise().mean();
  b.mbar = miss.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - b.xbar.transpose();
  const Eigen::MatrixXd mc = miss.rowwise() - b.mbar.transpose();
  fill_symmetric(xc, denom, b.Sxx);
  fill_symmetric(mc, denom, b.Smm);
  b.Sxm = xc.transpose() * mc / denom;
  if (y != nullptr) {
    b.ybar = y->mean();
    const Eigen::VectorXd yc = y->array() - b.ybar;
    b.yvar = yc.squaredNorm() / denom;
    b.sxy = xc.transpose() * yc / denom;
    b.smy = mc.transpose() * yc / denom;
  }
  return b;
}

// cov(x^imp(ct), x^imp(cs)) over the block's rows
Eigen::MatrixXd imputed_cov(const BlockMoments& b, const Eigen::VectorXd& ct,
                            const Eigen::VectorXd& cs) {
  Eigen::MatrixXd out = b.Sxx;
  out += b.Sxm * cs.asDiagonal();
  out += ct.asDiagonal() * b.Sxm.transpose();
  out += ct.asDiagonal() * b.Smm * cs.asDiagonal();
  return out;
}

struct MomentFit {
  Eigen::VectorXd beta;
  double resid_var = 0;
};

// Within-block least-squares slope of y on the imputed covariates at c, and
// the sample variance of the residual, both straight from the moment tables.
MomentFit fit_at(const BlockMoments& b, const Eigen::VectorXd& c) {
  const Eigen::MatrixXd V = imputed_cov(b, c, c);
  const Eigen::VectorXd xy = b.sxy + c.asDiagonal() * b.smy;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  qr.setThreshold(1e-10);
  if (qr.rank() < V.cols()) {
    throw NumericalError(
        "variance: imputed-covariate moment matrix is singular; remove collinear or constant covariates");
  }
  MomentFit fit;
  fit.beta = qr.solve(xy);
  const double s2 = b.yvar - 2.0 * fit.beta.dot(xy) + fit.beta.dot(V * fit.beta);
  fit.resid_var = std::max(s2, 0.0);
  return fit;
}

void check_contrast_arms(const TrialDataset& dataset, int t, int s) {
  const int k = dataset.n_arms();
  if (k < 2) {
    throw std::invalid_argument("contrast variance: need at least two arms");
  }
  if (t < 1 || t > k || s < 1 || s > k || t == s) {
    throw std::invalid_argument("contrast variance: arms must be distinct labels in 1..k");
  }
}

BlockMoments arm_moments(const TrialDataset& dataset, int t) {
  const auto rows = arm_rows(dataset, t);
  const Eigen::VectorXd yt = select_rows(dataset.y, rows);
  return block_moments(select_rows(dataset.x, rows), select_rows(dataset.r, rows), &yt);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  }
  const bool upper = p > 0.5;
  const double q = upper ? 1.0 - p : p;
  double x = q < 0.5 ? -std::sqrt(std::max(0.0, -2.0 * std::log(q))) : 0.0;
  for (int it = 0; it < 100; ++it) {
    const double f = normal_cdf(x) - q;
    const double pdf = std::exp(-0.5 * x * x) * kInvSqrt2Pi;
    if (pdf <= 0.0) {
      break;
    }
    const double dx = f / pdf;
    x -= dx;
    if (std::abs(dx) < 1e-13 * (1.0 + std::abs(x))) {
      break;
    }
  }
  return upper ? -x : x;
}

ContrastInference confidence_interval(double estimate, double sigma2, Eigen::Index n,
                                      double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence_interval: level must lie in (0,1)");
  }
  if (n < 1) {
    throw std::invalid_argument("confidence_interval: n must be at least 1");
  }
  if (sigma2 < 0.0) {
    std::ostringstream msg;
    msg << "confidence_interval: negative variance estimate " << sigma2
        << " (implementation bug upstream; the quadratic forms are nonnegative)";
    throw NumericalError(msg.str());
  }
  ContrastInference out;
  out.estimate = estimate;
  out.level = level;
  out.se = std::sqrt(sigma2 / static_cast<double>(n));
  const double z = normal_quantile(0.5 * (1.0 + level));
  out.lower = estimate - z * out.se;
  out.upper = estimate + z * out.se;
  return out;
}

double var_anova_contrast(const TrialDataset& dataset, int t, int s) {
  check_contrast_arms(dataset, t, s);
  const Eigen::VectorXd pi = allocation(dataset);
  const double s2t = sample_var(select_rows(dataset.y, arm_rows(dataset, t)));
  const double s2s = sample_var(select_rows(dataset.y, arm_rows(dataset, s)));
  return s2t / pi[t - 1] + s2s / pi[s - 1];
}

struct SiVarianceEvaluator::Impl {
  BlockMoments full;
  BlockMoments arm_t, arm_s;
  double pi_t = 0, pi_s = 0;
  int t = 0, s = 0;
  Eigen::Index J = 0;
};

SiVarianceEvaluator::SiVarianceEvaluator(const TrialDataset& dataset, int t, int s)
    : impl_(std::make_unique<Impl>()) {
  check_contrast_arms(dataset, t, s);
  impl_->t = t;
  impl_->s = s;
  impl_->J = dataset.n_covariates();
  impl_->full = block_moments(dataset.x, dataset.r, nullptr);
  impl_->arm_t = arm_moments(dataset, t);
  impl_->arm_s = arm_moments(dataset, s);
  const Eigen::VectorXd pi = allocation(dataset);
  impl_->pi_t = pi[t - 1];
  impl_->pi_s = pi[s - 1];
}

SiVarianceEvaluator::~SiVarianceEvaluator() = default;
SiVarianceEvaluator::SiVarianceEvaluator(SiVarianceEvaluator&&) noexcept = default;

Eigen::Index SiVarianceEvaluator::n_covariates() const { return impl_->J; }

double SiVarianceEvaluator::operator()(const Eigen::VectorXd& c) const {
  if (c.size() != impl_->J) {
    throw std::invalid_argument("variance: imputation vector length does not match");
  }
  const MomentFit ft = fit_at(impl_->arm_t, c);
  const MomentFit fs = fit_at(impl_->arm_s, c);
  const Eigen::MatrixXd sig = imputed_cov(impl_->full, c, c);
  const Eigen::VectorXd d = ft.beta - fs.beta;
  return ft.resid_var / impl_->pi_t + fs.resid_var / impl_->pi_s + d.dot(sig * d);
}

Eigen::VectorXd SiVarianceEvaluator::slope(int a, const Eigen::VectorXd& c) const {
  if (a == impl_->t) {
    return fit_at(impl_->arm_t, c).beta;
  }
  if (a == impl_->s) {
    return fit_at(impl_->arm_s, c).beta;
  }
  throw std::invalid_argument("slope: arm label is not part of this contrast");
}

double var_si_contrast(const TrialDataset& dataset, const ImputationPlan& plan, int t, int s) {
  if (!plan.single()) {
    throw std::invalid_argument("var_si_contrast: plan must carry one shared imputation vector");
  }
  const SiVarianceEvaluator eval(dataset, t, s);
  return eval(plan.row(1));
}

double var_cwi_contrast(const TrialDataset& dataset, const ImputationPlan& plan, int t, int s) {
  check_contrast_arms(dataset, t, s);
  if (plan.values.rows() != dataset.n_arms() || plan.values.cols() != dataset.n_covariates()) {
    throw std::invalid_argument("var_cwi_contrast: plan shape does not match the dataset");
  }
  const Eigen::VectorXd ct = plan.row(t);
  const Eigen::VectorXd cs = plan.row(s);
  const BlockMoments full = block_moments(dataset.x, dataset.r, nullptr);
  const BlockMoments bt = arm_moments(dataset, t);
  const BlockMoments bs = arm_moments(dataset, s);
  const Eigen::VectorXd pi = allocation(dataset);

  const MomentFit fit_t = fit_at(bt, ct);        // arm t in its own world
  const MomentFit fit_s = fit_at(bs, cs);        // arm s in its own world
  const Eigen::VectorXd beta_s_ct = fit_at(bs, ct).beta;  // arm s at world t
  const Eigen::VectorXd beta_t_cs = fit_at(bt, cs).beta;  // arm t at world s

  const Eigen::MatrixXd sig_t = imputed_cov(full, ct, ct);
  const Eigen::MatrixXd sig_s = imputed_cov(full, cs, cs);
  const Eigen::MatrixXd sig_ts = imputed_cov(full, ct, cs);

  double out = fit_t.resid_var / pi[t - 1] + fit_s.resid_var / pi[s - 1];
  out += fit_t.beta.dot(sig_t * fit_t.beta);
  out += fit_s.beta.dot(sig_s * fit_s.beta);
  out += 2.0 * fit_t.beta.dot(sig_ts * fit_s.beta);
  out -= 2.0 * beta_s_ct.dot(sig_t * fit_t.beta);
  out -= 2.0 * fit_s.beta.dot(sig_s * beta_t_cs);
  return out;
}

double var_mim_contrast(const TrialDataset& dataset, const EstimateResult& mim_result,
                        int t, int s) {
  check_contrast_arms(dataset, t, s);
  if (mim_result.method != Method::anhecova_mim || !mim_result.gammas.has_value()) {
    throw std::invalid_argument("var_mim_contrast: result must come from anhecova_mim");
  }
  const Eigen::Index n = dataset.n();
  const Eigen::Index J = dataset.n_covariates();
  const auto& retained = mim_result.indicators.columns;
  const Eigen::Index Jr = static_cast<Eigen::Index>(retained.size());

  // Augmented regressors: zero-imputed covariates plus retained indicators.
  Eigen::MatrixXd z(n, J + Jr);
  z.leftCols(J) = dataset.x;
  for (Eigen::Index c = 0; c < Jr; ++c) {
    z.col(J + c) = dataset.r.col(retained[static_cast<size_t>(c)]);
  }

  auto arm_slope = [&](int a) {
    Eigen::VectorXd tau(J + Jr);
    tau.head(J) = mim_result.betas.row(a - 1);
    tau.tail(Jr) = mim_result.gammas->row(a - 1);
    return tau;
  };
  const Eigen::VectorXd tau_t = arm_slope(t);
  const Eigen::VectorXd tau_s = arm_slope(s);

  auto resid_var = [&](int a, const Eigen::VectorXd& tau) {
    const auto rows = arm_rows(dataset, a);
    const Eigen::VectorXd resid = select_rows(dataset.y, rows) - select_rows(z, rows) * tau;
    return sample_var(resid);
  };

  const Eigen::VectorXd pi = allocation(dataset);
  const Eigen::MatrixXd sig = sample_cov_matrix(z);
  const Eigen::VectorXd d = tau_t - tau_s;
  return resid_var(t, tau_t) / pi[t - 1] + resid_var(s, tau_s) / pi[s - 1] + d.dot(sig * d);
}

}  // namespace rctmiss
