#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "rctmiss/dataset.hpp"

namespace rctmiss {

// Built-in two-arm data generating processes. All three share the covariate
// means/variances and a true contrast of exactly 1; they differ in how the
// missingness indicators are generated:
//   case1 - indicators independent of both covariates and outcomes
//   case2 - indicators depend on the covariate value itself
//   case3 - correlated covariates; indicators depend on the covariate and on
//           both potential outcomes (strongly prognostic missingness)
enum class Case { case1, case2, case3 };

enum class SimMethod { anova, si_mean, si_opt, mim };

const char* case_name(Case c);
const char* sim_method_name(SimMethod m);

struct ScenarioConfig {
  Case scenario = Case::case1;
  Eigen::Index n = 500;
  int n_covariates = 5;  // 2 or 5: two exposes X1, X2 only, outcomes use all five
  int reps = 3000;
  std::uint64_t seed = 0;
  double rho = 0.3;  // case3 pairwise covariate correlation
  std::vector<SimMethod> methods = {SimMethod::anova, SimMethod::si_mean,
                                    SimMethod::si_opt, SimMethod::mim};
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Per-subject potential outcomes and the unmasked covariate draw, retained
// for oracle checks.
struct TruthRecord {
  Eigen::VectorXd y1;
  Eigen::VectorXd y2;
  Eigen::MatrixXd x_full;  // n rows, all five covariates before masking
  double true_contrast = 1.0;
};

std::pair<TrialDataset, TruthRecord> generate(const ScenarioConfig& config, int rep_index);

struct MethodReport {
  SimMethod method = SimMethod::anova;
  double bias = 0;
  double sd = 0;
  bool sd_defined = false;
  double mean_se = 0;
  double coverage_pct = 0;
  int included = 0;
  int excluded = 0;
};

struct SimulationReport {
  ScenarioConfig config;
  std::vector<MethodReport> rows;
  double wall_seconds = 0;
};

// Runs the replications concurrently (per-replication RNG streams, merged in
// index order) and reports bias, Monte Carlo SD, mean standard error, and
// 95% coverage of the true contrast per method. Replications whose estimator
// throws are excluded and counted.
SimulationReport run_monte_carlo(const ScenarioConfig& config);

}  // namespace rctmiss
