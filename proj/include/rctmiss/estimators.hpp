#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rctmiss/dataset.hpp"
#include "rctmiss/imputation.hpp"

namespace rctmiss {

enum class Method { anova, ancova_si, anhecova_si, anhecova_cwi, anhecova_mim, anhecova_ti };

const char* method_name(Method m);

struct EstimateResult {
  Eigen::VectorXd theta;  // per-arm mean estimates, length k
  Eigen::MatrixXd betas;  // covariate slope per arm (k rows; equal rows for ancova, zero for anova)
  std::optional<Eigen::MatrixXd> gammas;  // indicator slopes per arm (k rows, one column per retained indicator)
  ImputationPlan plan;
  Method method = Method::anova;
  // anhecova_mim only: the indicator set actually adjusted for, and any
  // indicator columns removed to restore full rank.
  ReducedIndicators indicators;
  std::vector<Eigen::Index> dropped_for_rank;
};

double contrast(const EstimateResult& result, int t, int s);

// Per-arm outcome means; no adjustment.
EstimateResult anova(const TrialDataset& dataset);

// One regression of Y on arm indicators plus globally centered imputed
// covariates; a common slope across arms. The plan must be single-imputation.
EstimateResult ancova_si(const TrialDataset& dataset, const ImputationPlan& plan);

// Heterogeneous-slope estimator under single imputation. Same computation as
// anhecova_cwi with every row equal; kept as its own entry point so the
// reduction is an identity by construction.
EstimateResult anhecova_si(const TrialDataset& dataset, const ImputationPlan& plan);

// For each arm t: impute the whole sample with the plan's row t, regress Y on
// an intercept plus the imputed covariates within arm t, then average the
// fitted line over all n subjects.
EstimateResult anhecova_cwi(const TrialDataset& dataset, const ImputationPlan& plan);

// Impute zeros and adjust for the reduced missingness indicators alongside
// the covariates, with per-arm slopes. Rank-deficient indicator columns are
// dropped globally and recorded in the result.
EstimateResult anhecova_mim(const TrialDataset& dataset);

// The per-arm imputation values at which the cross-world estimator reproduces
// the missingness-indicator estimator: elementwise -gamma/beta for covariates
// whose indicator was retained, 0 for the rest.
Eigen::MatrixXd mim_to_cwi_values(const EstimateResult& mim_result);

// Two-arm contrast where subjects are imputed once, with c1 under arm 1 and
// c2 under arm 2, instead of imputing the whole sample per arm.
double anhecova_ti(const TrialDataset& dataset, const Eigen::VectorXd& c1,
                   const Eigen::VectorXd& c2);

}  // namespace rctmiss
