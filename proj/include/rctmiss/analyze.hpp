#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rctmiss/dataset.hpp"
#include "rctmiss/estimators.hpp"
#include "rctmiss/variance.hpp"

#include "json.hpp"

namespace rctmiss {

struct AnalyzeRequest {
  std::string input_path;
  std::string outcome_col;
  std::string arm_col;
  std::vector<std::string> covariate_cols;  // empty = all remaining numeric columns
  std::string method = "si-mean";  // anova | si-mean | si-fixed | si-opt | cwi | mim
  int contrast_t = 2;
  int contrast_s = 1;
  double level = 0.95;
  std::optional<std::vector<double>> pi;
  std::string format = "table";  // table | json | csv
  std::vector<std::string> na_tokens = {"", "NA"};
  std::optional<std::vector<double>> fixed_values;  // required for si-fixed
};

struct LoadedTrial {
  TrialDataset dataset;
  std::vector<std::string> arm_labels;      // label of arm t at index t-1, by first appearance
  std::vector<std::string> covariate_names;
};

// Reads and validates the request's CSV: empty cells and the configured
// missing-value tokens become masked entries, arm labels map to 1..k by
// first appearance, and any non-numeric outcome/covariate cell is an error
// naming the row and column.
LoadedTrial load_trial(const AnalyzeRequest& request);

struct AnalysisOutput {
  EstimateResult estimate;
  ContrastInference inference;
  LoadedTrial trial;
  AnalyzeRequest request;
  std::vector<Eigen::Index> per_arm_counts;
  Eigen::MatrixXd imputation_values;          // values actually used, one row per arm
  std::optional<Eigen::MatrixXd> cwi_values;  // mim: implied cross-world values, when defined
  std::optional<double> si_opt_objective;     // si-opt: objective at the optimum
  std::vector<std::string> notes;             // reductions, exclusions, mapping echo

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
  std::string to_csv() const;
  std::string render() const;  // per request.format
};

AnalysisOutput run_analysis(const LoadedTrial& trial, const AnalyzeRequest& request);

}  // namespace rctmiss
