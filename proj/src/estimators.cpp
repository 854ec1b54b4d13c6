#include "rctmiss/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rctmiss/linalg.hpp"

namespace rctmiss {

const char* method_name(Method m) {
  switch (m) {
    case Method::anova: return "anova";
    case Method::ancova_si: return "ancova-si";
    case Method::anhecova_si: return "anhecova-si";
    case Method::anhecova_cwi: return "anhecova-cwi";
    case Method::anhecova_mim: return "anhecova-mim";
    case Method::anhecova_ti: return "anhecova-ti";
  }
  return "?";
}

double contrast(const EstimateResult& result, int t, int s) {
  const int k = static_cast<int>(result.theta.size());
  if (t < 1 || t > k || s < 1 || s > k) {
    throw std::invalid_argument("contrast: arm labels out of range");
  }
  return result.theta[t - 1] - result.theta[s - 1];
}

namespace {

struct ArmFit {
  double intercept = 0;
  Eigen::VectorXd slope;
};

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& covs) {
  Eigen::MatrixXd design(covs.rows(), covs.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covs.cols()) = covs;
  return design;
}

ArmFit fit_within_arm(const Eigen::MatrixXd& covs, const Eigen::VectorXd& y,
                      const char* what, int arm_label) {
  const LsFit fit = ols(with_intercept(covs), y);
  if (!fit.rank_ok) {
    std::ostringstream msg;
    msg << what << ": design is rank-deficient in arm " << arm_label
        << "; remove collinear or constant covariates";
    throw NumericalError(msg.str());
  }
  return {fit.coefficients[0], fit.coefficients.tail(covs.cols())};
}

ImputationPlan zero_plan(const TrialDataset& dataset, Strategy strategy) {
  ImputationPlan plan;
  plan.strategy = strategy;
  plan.values = Eigen::MatrixXd::Zero(dataset.n_arms(), dataset.n_covariates());
  return plan;
}

}  // namespace

EstimateResult anova(const TrialDataset& dataset) {
  const int k = dataset.n_arms();
  EstimateResult result;
  result.method = Method::anova;
  result.plan = zero_plan(dataset, Strategy::fixed);
  result.theta.resize(k);
  result.betas = Eigen::MatrixXd::Zero(k, dataset.n_covariates());
  for (int t = 1; t <= k; ++t) {
    result.theta[t - 1] = select_rows(dataset.y, arm_rows(dataset, t)).mean();
  }
  return result;
}

EstimateResult ancova_si(const TrialDataset& dataset, const ImputationPlan& plan) {
  if (!plan.single()) {
    throw std::invalid_argument("ancova_si: plan must carry one shared imputation vector");
  }
  const int k = dataset.n_arms();
  const Eigen::Index n = dataset.n();
  const Eigen::Index J = dataset.n_covariates();

  const Eigen::MatrixXd ximp = impute(dataset.x, dataset.r, plan.row(1));
  const Eigen::RowVectorXd center = ximp.colwise().mean();

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, k + J);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, dataset.arm[i] - 1) = 1.0;
  }
  design.rightCols(J) = ximp.rowwise() - center;

  const LsFit fit = ols(design, dataset.y);
  if (!fit.rank_ok) {
    throw NumericalError(
        "ancova: rank-deficient design; remove collinear or constant covariates");
  }

  EstimateResult result;
  result.method = Method::ancova_si;
  result.plan = plan;
  result.theta = fit.coefficients.head(k);
  result.betas.resize(k, J);
  for (int t = 0; t < k; ++t) {
    result.betas.row(t) = fit.coefficients.tail(J).transpose();
  }
  return result;
}

EstimateResult anhecova_cwi(const TrialDataset& dataset, const ImputationPlan& plan) {
  const int k = dataset.n_arms();
  const Eigen::Index J = dataset.n_covariates();
  if (plan.values.rows() != k || plan.values.cols() != J) {
    throw std::invalid_argument("anhecova_cwi: plan shape does not match the dataset");
  }

  EstimateResult result;
  result.method = Method::anhecova_cwi;
  result.plan = plan;
  result.theta.resize(k);
  result.betas.resize(k, J);

  for (int t = 1; t <= k; ++t) {
    const Eigen::MatrixXd ximp = impute(dataset.x, dataset.r, plan.row(t));
    const auto rows = arm_rows(dataset, t);
    const Eigen::MatrixXd covs = select_rows(ximp, rows);
    const Eigen::VectorXd yt = select_rows(dataset.y, rows);
    const ArmFit fit = fit_within_arm(covs, yt, "anhecova", t);
    const Eigen::VectorXd arm_mean = covs.colwise().mean();
    const Eigen::VectorXd all_mean = ximp.colwise().mean();
    result.betas.row(t - 1) = fit.slope.transpose();
    result.theta[t - 1] = yt.mean() - fit.slope.dot(arm_mean - all_mean);
  }
  return result;
}

EstimateResult anhecova_si(const TrialDataset& dataset, const ImputationPlan& plan) {
  if (!plan.single()) {
    throw std::invalid_argument("anhecova_si: plan must carry one shared imputation vector");
  }
  EstimateResult result = anhecova_cwi(dataset, plan);
  result.method = Method::anhecova_si;
  return result;
}

EstimateResult anhecova_mim(const TrialDataset& dataset) {
  const int k = dataset.n_arms();
  const Eigen::Index J = dataset.n_covariates();
  const ReducedIndicators reduced = reduce_indicators(dataset.r);

  std::vector<Eigen::Index> retained = reduced.columns;
  std::vector<Eigen::Index> dropped_for_rank;

  auto arm_design = [&](const std::vector<Eigen::Index>& rows,
                        const std::vector<Eigen::Index>& ind_cols) {
    Eigen::MatrixXd covs(static_cast<Eigen::Index>(rows.size()),
                         J + static_cast<Eigen::Index>(ind_cols.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      const Eigen::Index row = rows[i];
      covs.row(static_cast<Eigen::Index>(i)).head(J) = dataset.x.row(row);
      for (size_t c = 0; c < ind_cols.size(); ++c) {
        covs(static_cast<Eigen::Index>(i), J + static_cast<Eigen::Index>(c)) =
            dataset.r(row, ind_cols[c]);
      }
    }
    return covs;
  };

  auto numerical_rank = [](const Eigen::MatrixXd& m) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    return qr.rank();
  };

  // Indicator columns that break full rank in any arm are dropped for every
  // arm, so the per-arm coefficient blocks stay aligned.
  for (;;) {
    std::set<Eigen::Index> offenders;
    for (int t = 1; t <= k; ++t) {
      const auto rows = arm_rows(dataset, t);
      const Eigen::MatrixXd design = with_intercept(arm_design(rows, retained));
      if (numerical_rank(design) == design.cols()) {
        continue;
      }
      Eigen::MatrixXd base = with_intercept(select_rows(dataset.x, rows));
      if (numerical_rank(base) < base.cols()) {
        std::ostringstream msg;
        msg << "mim: covariate design is rank-deficient in arm " << t
            << "; remove collinear or constant covariates";
        throw NumericalError(msg.str());
      }
      for (const Eigen::Index j : retained) {
        Eigen::MatrixXd cand(base.rows(), base.cols() + 1);
        cand.leftCols(base.cols()) = base;
        for (size_t i = 0; i < rows.size(); ++i) {
          cand(static_cast<Eigen::Index>(i), base.cols()) = dataset.r(rows[i], j);
        }
        if (numerical_rank(cand) == cand.cols()) {
          base = std::move(cand);
        } else {
          offenders.insert(j);
        }
      }
    }
    if (offenders.empty()) {
      break;
    }
    std::vector<Eigen::Index> next;
    for (const Eigen::Index j : retained) {
      if (offenders.count(j)) {
        dropped_for_rank.push_back(j);
      } else {
        next.push_back(j);
      }
    }
    retained = std::move(next);
  }

  const Eigen::Index Jr = static_cast<Eigen::Index>(retained.size());
  EstimateResult result;
  result.method = Method::anhecova_mim;
  result.plan = zero_plan(dataset, Strategy::mim);
  result.indicators = reduced;
  result.indicators.columns = retained;
  result.dropped_for_rank = dropped_for_rank;
  result.theta.resize(k);
  result.betas.resize(k, J);
  result.gammas = Eigen::MatrixXd::Zero(k, Jr);

  const Eigen::VectorXd xbar_all = dataset.x.colwise().mean();
  Eigen::VectorXd rbar_all(Jr);
  for (Eigen::Index c = 0; c < Jr; ++c) {
    rbar_all[c] = dataset.r.col(retained[static_cast<size_t>(c)]).mean();
  }

  for (int t = 1; t <= k; ++t) {
    const auto rows = arm_rows(dataset, t);
    const Eigen::MatrixXd covs = arm_design(rows, retained);
    const Eigen::VectorXd yt = select_rows(dataset.y, rows);
    const ArmFit fit = fit_within_arm(covs, yt, "mim", t);

    const Eigen::VectorXd beta = fit.slope.head(J);
    const Eigen::VectorXd gamma = fit.slope.tail(Jr);
    result.betas.row(t - 1) = beta.transpose();
    result.gammas->row(t - 1) = gamma.transpose();

    const Eigen::VectorXd arm_mean = covs.colwise().mean();
    result.theta[t - 1] = yt.mean() - beta.dot(arm_mean.head(J) - xbar_all) -
                          gamma.dot(arm_mean.tail(Jr) - rbar_all);
  }
  return result;
}

Eigen::MatrixXd mim_to_cwi_values(const EstimateResult& mim_result) {
  if (mim_result.method != Method::anhecova_mim || !mim_result.gammas.has_value()) {
    throw std::invalid_argument("mim_to_cwi_values: result must come from anhecova_mim");
  }
  const Eigen::Index k = mim_result.theta.size();
  const Eigen::Index J = mim_result.betas.cols();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(k, J);
  for (Eigen::Index t = 0; t < k; ++t) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const Eigen::Index pos = mim_result.indicators.retained_position(j);
      if (pos < 0) {
        // No dedicated indicator: either the column has no missingness or a
        // retained duplicate carries the adjustment. Zero keeps the
        // cross-world estimator equal to the mim estimator.
        continue;
      }
      const double beta = mim_result.betas(t, j);
      if (std::abs(beta) < 1e-12) {
        std::ostringstream msg;
        msg << "cross-world value undefined (beta ~ 0) for arm " << t + 1
            << ", covariate " << j + 1;
        throw NumericalError(msg.str());
      }
      values(t, j) = -(*mim_result.gammas)(t, pos) / beta;
    }
  }
  return values;
}

double anhecova_ti(const TrialDataset& dataset, const Eigen::VectorXd& c1,
                   const Eigen::VectorXd& c2) {
  if (dataset.n_arms() != 2) {
    throw std::invalid_argument("anhecova_ti: requires exactly two arms");
  }
  const Eigen::Index n = dataset.n();
  const auto rows1 = arm_rows(dataset, 1);
  const auto rows2 = arm_rows(dataset, 2);
  const double w1 = static_cast<double>(rows1.size()) / static_cast<double>(n);
  const double w2 = static_cast<double>(rows2.size()) / static_cast<double>(n);

  const Eigen::MatrixXd x1 =
      impute(select_rows(dataset.x, rows1), select_rows(dataset.r, rows1), c1);
  const Eigen::MatrixXd x2 =
      impute(select_rows(dataset.x, rows2), select_rows(dataset.r, rows2), c2);
  const Eigen::VectorXd y1 = select_rows(dataset.y, rows1);
  const Eigen::VectorXd y2 = select_rows(dataset.y, rows2);

  const ArmFit fit1 = fit_within_arm(x1, y1, "anhecova", 1);
  const ArmFit fit2 = fit_within_arm(x2, y2, "anhecova", 2);

  const Eigen::VectorXd xbar1 = x1.colwise().mean();
  const Eigen::VectorXd xbar2 = x2.colwise().mean();
  const Eigen::VectorXd pooled = fit2.slope * w1 + fit1.slope * w2;
  return y2.mean() - y1.mean() - pooled.dot(xbar2 - xbar1);
}

}  // namespace rctmiss
