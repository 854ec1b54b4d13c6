#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rctmiss/dataset.hpp"

namespace rctmiss {

enum class Strategy { fixed, observed_mean, arm_mean, cross_world, mim };

const char* strategy_name(Strategy s);

// Per-arm imputation vectors. Row t-1 holds the values used when estimating
// arm t's mean; single-imputation strategies keep all rows equal.
struct ImputationPlan {
  Strategy strategy = Strategy::fixed;
  Eigen::MatrixXd values;  // k rows, one per arm; J columns

  bool single() const;  // all rows equal
  Eigen::VectorXd row(int t) const { return values.row(t - 1); }
};

// Entry (i, j) is x(i, j) where the mask is 1 and c(j) where it is 0.
// Observed entries pass through bit-identical.
Eigen::MatrixXd impute(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                       const Eigen::VectorXd& c);

// Column means over observed entries.
Eigen::VectorXd observed_means(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r);

// Column means over observed entries within arm t.
Eigen::VectorXd arm_means(const TrialDataset& dataset, int t);

ImputationPlan build_plan(const TrialDataset& dataset, Strategy strategy,
                          const std::optional<Eigen::MatrixXd>& fixed_values = {});

}  // namespace rctmiss
