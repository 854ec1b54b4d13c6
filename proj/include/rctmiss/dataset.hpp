#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "rctmiss/errors.hpp"

namespace rctmiss {

// A k-arm trial: outcomes, arm labels in 1..k, and a covariate matrix with a
// 0/1 observedness mask (1 = observed). Entries of x where the mask is 0
// carry no information; validate() stores them as 0 so that x is elementwise
// equal to mask * covariate from then on.
struct TrialDataset {
  Eigen::VectorXd y;
  Eigen::VectorXi arm;  // labels 1..k, dense
  Eigen::MatrixXd x;    // n rows, one column per covariate
  Eigen::MatrixXd r;    // same shape, entries in {0, 1}
  std::optional<Eigen::VectorXd> pi;  // expected allocation proportions, length k

  Eigen::Index n() const { return y.size(); }
  Eigen::Index n_covariates() const { return x.cols(); }
  int n_arms() const { return arm.size() > 0 ? arm.maxCoeff() : 0; }
};

// Missingness-indicator columns kept for adjustment after removing constant
// columns and exact duplicates.
struct ReducedIndicators {
  static constexpr Eigen::Index kConstant = -1;

  std::vector<Eigen::Index> columns;  // retained, in ascending order
  // dropped column -> the retained duplicate it repeats, or kConstant when
  // the column is constant (all-observed or fully missing)
  std::vector<std::pair<Eigen::Index, Eigen::Index>> dropped;

  bool is_retained(Eigen::Index j) const;
  // position of j within `columns`, or -1 when j was dropped
  Eigen::Index retained_position(Eigen::Index j) const;
};

// Checks every dataset invariant and returns the dataset with masked x
// entries zeroed. Throws ValidationError naming the first violation.
TrialDataset validate(TrialDataset dataset);

ReducedIndicators reduce_indicators(const Eigen::MatrixXd& r);

// (n_1/n, ..., n_k/n)
Eigen::VectorXd empirical_pi(const TrialDataset& dataset);

// User-supplied proportions when present, empirical otherwise.
Eigen::VectorXd allocation(const TrialDataset& dataset);

std::vector<Eigen::Index> arm_rows(const TrialDataset& dataset, int t);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows);
Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows);

}  // namespace rctmiss
