#include "rctmiss/imputation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rctmiss {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::fixed: return "fixed";
    case Strategy::observed_mean: return "observed-mean";
    case Strategy::arm_mean: return "arm-mean";
    case Strategy::cross_world: return "cross-world";
    case Strategy::mim: return "mim";
  }
  return "?";
}

bool ImputationPlan::single() const {
  for (Eigen::Index t = 1; t < values.rows(); ++t) {
    if (values.row(t) != values.row(0)) {
      return false;
    }
  }
  return true;
}

Eigen::MatrixXd impute(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                       const Eigen::VectorXd& c) {
  if (r.rows() != x.rows() || r.cols() != x.cols()) {
    throw std::invalid_argument("impute: x and r shapes differ");
  }
  if (c.size() != x.cols()) {
    throw std::invalid_argument("impute: imputation vector length does not match covariate count");
  }
  if (!c.allFinite()) {
    throw std::invalid_argument("impute: imputation values must be finite");
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out.col(j) = (r.col(j).array() == 1.0).select(x.col(j), c[j]);
  }
  return out;
}

Eigen::VectorXd observed_means(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r) {
  if (r.rows() != x.rows() || r.cols() != x.cols()) {
    throw std::invalid_argument("observed_means: x and r shapes differ");
  }
  Eigen::VectorXd means(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double count = r.col(j).sum();
    if (count < 1.0) {
      std::ostringstream msg;
      msg << "covariate " << j + 1 << " fully missing";
      throw ValidationError(msg.str());
    }
    means[j] = r.col(j).cwiseProduct(x.col(j)).sum() / count;
  }
  return means;
}

Eigen::VectorXd arm_means(const TrialDataset& dataset, int t) {
  const auto rows = arm_rows(dataset, t);
  if (rows.empty()) {
    std::ostringstream msg;
    msg << "arm " << t << " has no subjects";
    throw ValidationError(msg.str());
  }
  Eigen::VectorXd means(dataset.n_covariates());
  for (Eigen::Index j = 0; j < dataset.n_covariates(); ++j) {
    double count = 0;
    double total = 0;
    for (const Eigen::Index i : rows) {
      count += dataset.r(i, j);
      total += dataset.r(i, j) * dataset.x(i, j);
    }
    if (count < 1.0) {
      std::ostringstream msg;
      msg << "arm " << t << " has no observed values for covariate " << j + 1;
      throw ValidationError(msg.str());
    }
    means[j] = total / count;
  }
  return means;
}

ImputationPlan build_plan(const TrialDataset& dataset, Strategy strategy,
                          const std::optional<Eigen::MatrixXd>& fixed_values) {
  const int k = dataset.n_arms();
  const Eigen::Index J = dataset.n_covariates();
  ImputationPlan plan;
  plan.strategy = strategy;
  plan.values.resize(k, J);

  auto broadcast = [&](const Eigen::VectorXd& c) {
    for (int t = 0; t < k; ++t) {
      plan.values.row(t) = c.transpose();
    }
  };

  switch (strategy) {
    case Strategy::fixed:
    case Strategy::cross_world: {
      if (!fixed_values.has_value()) {
        throw std::invalid_argument("build_plan: this strategy requires explicit values");
      }
      const Eigen::MatrixXd& v = *fixed_values;
      if (!v.allFinite()) {
        throw std::invalid_argument("build_plan: imputation values must be finite");
      }
      if (v.rows() == 1 && v.cols() == J) {
        broadcast(v.row(0).transpose());
      } else if (v.rows() == J && v.cols() == 1) {
        broadcast(v.col(0));
      } else if (v.rows() == k && v.cols() == J) {
        if (strategy == Strategy::fixed) {
          for (Eigen::Index t = 1; t < k; ++t) {
            if (v.row(t) != v.row(0)) {
              throw std::invalid_argument("build_plan: fixed strategy requires one shared vector");
            }
          }
        }
        plan.values = v;
      } else {
        throw std::invalid_argument("build_plan: values must be a length-J vector or a k-by-J matrix");
      }
      break;
    }
    case Strategy::observed_mean:
      broadcast(observed_means(dataset.x, dataset.r));
      break;
    case Strategy::arm_mean:
      for (int t = 1; t <= k; ++t) {
        plan.values.row(t - 1) = arm_means(dataset, t).transpose();
      }
      break;
    case Strategy::mim:
      plan.values.setZero();
      break;
  }
  return plan;
}

}  // namespace rctmiss
