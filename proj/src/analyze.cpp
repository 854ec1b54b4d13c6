#include "rctmiss/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "rctmiss/csv.hpp"
#include "rctmiss/imputation.hpp"
#include "rctmiss/optimal_si.hpp"

namespace rctmiss {

namespace {

bool is_missing_token(const std::string& cell, const std::vector<std::string>& tokens) {
  return std::find(tokens.begin(), tokens.end(), cell) != tokens.end();
}

bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) {
    return false;
  }
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + cell.size();
}

[[noreturn]] void not_numeric(size_t row, const std::string& column) {
  std::ostringstream msg;
  msg << "row " << row << ", column " << column << ": not numeric";
  throw ValidationError(msg.str());
}

}  // namespace

LoadedTrial load_trial(const AnalyzeRequest& request) {
  const CsvTable table = read_csv_file(request.input_path);

  auto require_column = [&](const std::string& name) {
    const Eigen::Index idx = table.column(name);
    if (idx < 0) {
      throw ValidationError("missing column: " + name);
    }
    return idx;
  };
  const Eigen::Index y_col = require_column(request.outcome_col);
  const Eigen::Index arm_col = require_column(request.arm_col);

  std::vector<Eigen::Index> cov_cols;
  std::vector<std::string> cov_names;
  if (!request.covariate_cols.empty()) {
    for (const std::string& name : request.covariate_cols) {
      cov_cols.push_back(require_column(name));
      cov_names.push_back(name);
    }
  } else {
    // default: every remaining column whose non-missing cells all parse
    for (size_t c = 0; c < table.header.size(); ++c) {
      const Eigen::Index idx = static_cast<Eigen::Index>(c);
      if (idx == y_col || idx == arm_col) {
        continue;
      }
      bool numeric = true;
      for (const auto& row : table.rows) {
        const std::string& cell = row[c];
        double v = 0;
        if (!is_missing_token(cell, request.na_tokens) && !parse_number(cell, v)) {
          numeric = false;
          break;
        }
      }
      if (numeric) {
        cov_cols.push_back(idx);
        cov_names.push_back(table.header[c]);
      }
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) {
    throw ValidationError("CSV: no data rows");
  }
  const Eigen::Index J = static_cast<Eigen::Index>(cov_cols.size());

  LoadedTrial trial;
  trial.covariate_names = cov_names;
  TrialDataset& ds = trial.dataset;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x = Eigen::MatrixXd::Zero(n, J);
  ds.r = Eigen::MatrixXd::Zero(n, J);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<size_t>(i)];
    const size_t row_number = static_cast<size_t>(i) + 1;

    const std::string& y_cell = row[static_cast<size_t>(y_col)];
    double y_value = 0;
    if (is_missing_token(y_cell, request.na_tokens) || !parse_number(y_cell, y_value)) {
      not_numeric(row_number, request.outcome_col);
    }
    ds.y[i] = y_value;

    const std::string& arm_cell = row[static_cast<size_t>(arm_col)];
    if (is_missing_token(arm_cell, request.na_tokens)) {
      std::ostringstream msg;
      msg << "row " << row_number << ", column " << request.arm_col << ": missing arm label";
      throw ValidationError(msg.str());
    }
    const auto found = std::find(trial.arm_labels.begin(), trial.arm_labels.end(), arm_cell);
    int label = 0;
    if (found == trial.arm_labels.end()) {
      trial.arm_labels.push_back(arm_cell);
      label = static_cast<int>(trial.arm_labels.size());
    } else {
      label = static_cast<int>(found - trial.arm_labels.begin()) + 1;
    }
    ds.arm[i] = label;

    for (Eigen::Index j = 0; j < J; ++j) {
      const std::string& cell = row[static_cast<size_t>(cov_cols[static_cast<size_t>(j)])];
      if (is_missing_token(cell, request.na_tokens)) {
        continue;  // mask stays 0
      }
      double value = 0;
      if (!parse_number(cell, value)) {
        not_numeric(row_number, cov_names[static_cast<size_t>(j)]);
      }
      ds.x(i, j) = value;
      ds.r(i, j) = 1.0;
    }
  }

  if (request.pi.has_value()) {
    ds.pi = Eigen::Map<const Eigen::VectorXd>(request.pi->data(),
                                              static_cast<Eigen::Index>(request.pi->size()));
  }
  trial.dataset = validate(std::move(ds));
  return trial;
}

AnalysisOutput run_analysis(const LoadedTrial& trial, const AnalyzeRequest& request) {
  const TrialDataset& ds = trial.dataset;
  const int k = ds.n_arms();
  const int t = request.contrast_t;
  const int s = request.contrast_s;
  if (t < 1 || t > k || s < 1 || s > k || t == s) {
    throw std::invalid_argument("contrast arms must be distinct labels in 1..k");
  }

  AnalysisOutput out;
  out.trial = trial;
  out.request = request;
  for (int a = 1; a <= k; ++a) {
    out.per_arm_counts.push_back(static_cast<Eigen::Index>(arm_rows(ds, a).size()));
  }
  for (int a = 1; a <= k; ++a) {
    std::ostringstream note;
    note << "arm " << a << " = \"" << trial.arm_labels[static_cast<size_t>(a - 1)]
         << "\" (n=" << out.per_arm_counts[static_cast<size_t>(a - 1)] << ")";
    out.notes.push_back(note.str());
  }

  double sigma2 = 0;
  if (request.method == "anova") {
    out.estimate = anova(ds);
    sigma2 = var_anova_contrast(ds, t, s);
  } else if (request.method == "si-mean") {
    const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
    out.estimate = anhecova_si(ds, plan);
    sigma2 = var_si_contrast(ds, plan, t, s);
  } else if (request.method == "si-fixed") {
    if (!request.fixed_values.has_value() ||
        static_cast<Eigen::Index>(request.fixed_values->size()) != ds.n_covariates()) {
      throw std::invalid_argument("si-fixed requires one imputation value per covariate");
    }
    const Eigen::Map<const Eigen::VectorXd> c(request.fixed_values->data(),
                                              static_cast<Eigen::Index>(request.fixed_values->size()));
    const ImputationPlan plan = build_plan(ds, Strategy::fixed, Eigen::MatrixXd(c.transpose()));
    out.estimate = anhecova_si(ds, plan);
    sigma2 = var_si_contrast(ds, plan, t, s);
  } else if (request.method == "si-opt") {
    const NumericOptimum opt = optimal_c_numeric(ds, t, s);
    if (!std::isfinite(opt.objective)) {
      throw NumericalError("si-opt: the variance objective could not be evaluated");
    }
    const ImputationPlan plan =
        build_plan(ds, Strategy::fixed, Eigen::MatrixXd(opt.c.transpose()));
    out.estimate = anhecova_si(ds, plan);
    sigma2 = opt.objective;
    out.si_opt_objective = opt.objective;
    if (!opt.converged) {
      out.notes.push_back("si-opt: search stopped at the evaluation budget; best point reported");
    }
  } else if (request.method == "cwi") {
    const EstimateResult mim = anhecova_mim(ds);
    const Eigen::MatrixXd values = mim_to_cwi_values(mim);
    ImputationPlan plan;
    plan.strategy = Strategy::cross_world;
    plan.values = values;
    out.estimate = anhecova_cwi(ds, plan);
    sigma2 = var_cwi_contrast(ds, plan, t, s);
    out.cwi_values = values;
  } else if (request.method == "mim") {
    const EstimateResult mim = anhecova_mim(ds);
    out.estimate = mim;
    sigma2 = var_mim_contrast(ds, mim, t, s);
    try {
      out.cwi_values = mim_to_cwi_values(mim);
    } catch (const NumericalError& err) {
      out.notes.push_back(std::string("implied cross-world values unavailable: ") + err.what());
    }
  } else {
    throw std::invalid_argument("unknown method: " + request.method);
  }

  if (out.estimate.method == Method::anhecova_mim) {
    for (const auto& [col, dup] : out.estimate.indicators.dropped) {
      std::ostringstream note;
      if (dup == ReducedIndicators::kConstant) {
        note << "indicator for covariate " << col + 1 << " dropped: constant";
      } else {
        note << "indicator for covariate " << col + 1 << " dropped: duplicates covariate "
             << dup + 1;
      }
      out.notes.push_back(note.str());
    }
    for (const Eigen::Index col : out.estimate.dropped_for_rank) {
      std::ostringstream note;
      note << "indicator for covariate " << col + 1 << " dropped: rank deficiency";
      out.notes.push_back(note.str());
    }
  }

  out.imputation_values = out.estimate.plan.values;
  out.inference =
      confidence_interval(contrast(out.estimate, t, s), sigma2, ds.n(), request.level);
  return out;
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

nlohmann::ordered_json AnalysisOutput::to_json() const {
  nlohmann::ordered_json config;
  config["input"] = request.input_path;
  config["outcome"] = request.outcome_col;
  config["arm"] = request.arm_col;
  config["covariates"] = trial.covariate_names;
  config["method"] = request.method;
  config["contrast"] = {request.contrast_t, request.contrast_s};
  config["level"] = request.level;
  if (request.pi.has_value()) {
    config["pi"] = *request.pi;
  } else {
    config["pi"] = nullptr;
  }

  nlohmann::ordered_json result;
  result["method"] = request.method;
  result["estimate"] = inference.estimate;
  result["se"] = inference.se;
  result["ci_lower"] = inference.lower;
  result["ci_upper"] = inference.upper;
  result["level"] = inference.level;
  result["n"] = trial.dataset.n();
  result["per_arm_counts"] = per_arm_counts;
  nlohmann::ordered_json theta = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < estimate.theta.size(); ++i) {
    theta.push_back(estimate.theta[i]);
  }
  result["theta"] = theta;
  result["betas"] = matrix_json(estimate.betas);
  result["gammas"] =
      estimate.gammas.has_value() ? matrix_json(*estimate.gammas) : nlohmann::ordered_json();
  result["imputation_values"] = matrix_json(imputation_values);
  result["cwi_values"] =
      cwi_values.has_value() ? matrix_json(*cwi_values) : nlohmann::ordered_json();
  result["si_opt_objective"] =
      si_opt_objective.has_value() ? nlohmann::ordered_json(*si_opt_objective)
                                   : nlohmann::ordered_json();

  nlohmann::ordered_json diagnostics;
  diagnostics["arm_labels"] = trial.arm_labels;
  diagnostics["notes"] = notes;

  nlohmann::ordered_json root;
  root["config"] = config;
  root["results"] = nlohmann::ordered_json::array({result});
  root["diagnostics"] = diagnostics;
  return root;
}

std::string AnalysisOutput::to_table() const {
  std::ostringstream os;
  os << "method: " << request.method << "\n";
  os << "n: " << trial.dataset.n() << "\n";
  for (const std::string& note : notes) {
    os << "  " << note << "\n";
  }
  os << "contrast: arm " << request.contrast_t << " - arm " << request.contrast_s << "\n";
  os << std::setprecision(6) << std::fixed;
  os << "estimate: " << inference.estimate << "\n";
  os << "se:       " << inference.se << "\n";
  os << static_cast<int>(request.level * 100 + 0.5) << "% CI:   [" << inference.lower << ", "
     << inference.upper << "]\n";
  os << "theta:";
  for (Eigen::Index i = 0; i < estimate.theta.size(); ++i) {
    os << " " << estimate.theta[i];
  }
  os << "\n";
  os << "imputation values (row per arm):\n";
  for (Eigen::Index i = 0; i < imputation_values.rows(); ++i) {
    os << "  arm " << i + 1 << ":";
    for (Eigen::Index j = 0; j < imputation_values.cols(); ++j) {
      os << " " << imputation_values(i, j);
    }
    os << "\n";
  }
  if (cwi_values.has_value()) {
    os << "implied cross-world values (row per arm):\n";
    for (Eigen::Index i = 0; i < cwi_values->rows(); ++i) {
      os << "  arm " << i + 1 << ":";
      for (Eigen::Index j = 0; j < cwi_values->cols(); ++j) {
        os << " " << (*cwi_values)(i, j);
      }
      os << "\n";
    }
  }
  if (si_opt_objective.has_value()) {
    os << "objective at optimum: " << *si_opt_objective << "\n";
  }
  return os.str();
}

std::string AnalysisOutput::to_csv() const {
  std::ostringstream os;
  os << "method,estimate,se,ci_lower,ci_upper,level,n\n";
  os << request.method << ',' << format_double(inference.estimate) << ','
     << format_double(inference.se) << ',' << format_double(inference.lower) << ','
     << format_double(inference.upper) << ',' << format_double(inference.level) << ','
     << trial.dataset.n() << "\n";
  return os.str();
}

std::string AnalysisOutput::render() const {
  if (request.format == "json") {
    return to_json().dump(2) + "\n";
  }
  if (request.format == "csv") {
    return to_csv();
  }
  return to_table();
}

}  // namespace rctmiss
