#pragma once

#include <Eigen/Dense>
#include <memory>

#include "rctmiss/dataset.hpp"
#include "rctmiss/estimators.hpp"
#include "rctmiss/imputation.hpp"

namespace rctmiss {

struct ContrastInference {
  double estimate = 0;
  double se = 0;
  double lower = 0;
  double upper = 0;
  double level = 0.95;
};

// Inverse standard-normal CDF, accurate to machine precision via safeguarded
// Newton iterations on erfc.
double normal_quantile(double p);

// estimate +/- z * sqrt(sigma2 / n). Negative sigma2 throws: the quadratic
// forms feeding it are nonnegative, so a negative value is a bug upstream.
ContrastInference confidence_interval(double estimate, double sigma2, Eigen::Index n,
                                      double level);

// Variance of sqrt(n) times the t-minus-s contrast, estimated by plugging
// sample moments into the asymptotic expressions.
double var_anova_contrast(const TrialDataset& dataset, int t, int s);
double var_si_contrast(const TrialDataset& dataset, const ImputationPlan& plan, int t, int s);
double var_cwi_contrast(const TrialDataset& dataset, const ImputationPlan& plan, int t, int s);
double var_mim_contrast(const TrialDataset& dataset, const EstimateResult& mim_result,
                        int t, int s);

// Precomputes the moment tables that make the single-imputation contrast
// variance a closed form in the imputation vector, so repeated evaluation
// (optimal-value search) costs O(J^3) instead of a fresh pass over the data.
class SiVarianceEvaluator {
 public:
  SiVarianceEvaluator(const TrialDataset& dataset, int t, int s);
  ~SiVarianceEvaluator();
  SiVarianceEvaluator(SiVarianceEvaluator&&) noexcept;

  // sigma2 for single imputation at c; throws NumericalError on a singular
  // imputed-covariate moment matrix.
  double operator()(const Eigen::VectorXd& c) const;

  // arm-a slope at imputation vector c (a is the 1-based arm label)
  Eigen::VectorXd slope(int a, const Eigen::VectorXd& c) const;

  Eigen::Index n_covariates() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rctmiss
