#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rctmiss/dataset.hpp"

namespace rctmiss {

// Sample moments of one covariate in a two-arm trial that determine the
// efficiency of single imputation as a function of the imputation value.
// tau_R and tau_RX are the covariances of 1-R and of R*X with the
// pi_1-weighted arm-2 outcome plus pi_2-weighted arm-1 outcome; each arm's
// observed outcomes identify the corresponding covariance under
// randomization, so the plug-in is the pi-weighted sum of within-arm sample
// covariances.
struct PopulationMoments1D {
  double tau_R = 0;
  double tau_RX = 0;
  double mean_X_obs = 0;  // mean of X over observed entries
  double var_R = 0;
  double var_X_obs = 0;   // variance of X over observed entries
  double mean_R = 0;
};

PopulationMoments1D moments_1d(const TrialDataset& dataset, Eigen::Index j);

enum class OptimalCKind { interior, observed_mean, degenerate_large };

const char* optimal_c_kind_name(OptimalCKind k);

struct OptimalC1D {
  double value = 0;
  OptimalCKind kind = OptimalCKind::interior;
};

// Closed-form variance-minimizing imputation value for one covariate.
// tau_R ~ 0 collapses the formula to the observed mean; a vanishing
// denominator means no finite optimum exists and a value far outside the
// data (10^6 observed-SD units, sign picked by the larger gain) is
// near-optimal. Throws when the covariate has no missingness.
OptimalC1D optimal_c_closed_1d(const PopulationMoments1D& m);

// Efficiency gain of single imputation at c over no adjustment, expressed
// through the stored moments. Nonnegative; approaches
// tau_R^2 / (pi1 pi2 var_R) as |c| grows.
double gain_1d(double c, const PopulationMoments1D& m, const Eigen::Vector2d& pi);

struct NumericOptimum {
  Eigen::VectorXd c;
  double objective = 0;
  bool converged = false;
};

// Derivative-free minimization of the single-imputation contrast variance
// over the imputation vector. Multi-start: observed means, +/- 2 observed-SD
// perturbations, and the mim-implied cross-world rows when defined; an
// explicit init is prepended. The winner is chosen by objective, then
// lexicographic c, so the search is deterministic. Non-convergence is
// reported, never thrown.
NumericOptimum optimal_c_numeric(const TrialDataset& dataset, int t, int s,
                                 const std::optional<Eigen::VectorXd>& init = {});

}  // namespace rctmiss
