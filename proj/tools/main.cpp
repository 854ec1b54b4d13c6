#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rctmiss/analyze.hpp"
#include "rctmiss/csv.hpp"
#include "rctmiss/errors.hpp"
#include "rctmiss/report.hpp"
#include "rctmiss/simulation.hpp"
#include "rctmiss/verify.hpp"

namespace {

using rctmiss::AnalyzeRequest;
using rctmiss::Case;
using rctmiss::ScenarioConfig;
using rctmiss::SimMethod;
using rctmiss::SimulationReport;

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

SimMethod parse_method(const std::string& name) {
  if (name == "anova") return SimMethod::anova;
  if (name == "si-mean") return SimMethod::si_mean;
  if (name == "si-opt") return SimMethod::si_opt;
  if (name == "mim") return SimMethod::mim;
  throw std::invalid_argument("unknown simulation method: " + name);
}

Case parse_case(int c) {
  switch (c) {
    case 1: return Case::case1;
    case 2: return Case::case2;
    case 3: return Case::case3;
  }
  throw std::invalid_argument("case must be 1, 2, or 3");
}

int run(int argc, char** argv) {
  CLI::App app{"Treatment-effect estimation under missing baseline covariates"};
  app.require_subcommand(1);

  // ---- analyze ----
  AnalyzeRequest request;
  std::vector<double> pi_values;
  std::vector<double> impute_values;
  std::vector<std::string> extra_na;
  std::vector<int> contrast_pair;
  CLI::App* analyze = app.add_subcommand("analyze", "Estimate a treatment contrast from a CSV file");
  analyze->add_option("input", request.input_path, "CSV file with one row per subject")->required();
  analyze->add_option("--outcome-col", request.outcome_col, "outcome column name")->required();
  analyze->add_option("--arm-col", request.arm_col, "treatment arm column name")->required();
  analyze->add_option("--covariates", request.covariate_cols,
                      "covariate column names (default: all remaining numeric columns)");
  analyze->add_option("--method", request.method, "anova | si-mean | si-fixed | si-opt | cwi | mim");
  analyze->add_option("--contrast", contrast_pair, "arms t s, reporting theta_t - theta_s")
      ->expected(2);
  analyze->add_option("--level", request.level, "confidence level (default 0.95)");
  analyze->add_option("--pi", pi_values, "expected allocation proportions, one per arm");
  analyze->add_option("--impute-values", impute_values, "imputation values for si-fixed");
  analyze->add_option("--format", request.format, "table | json | csv");
  analyze->add_option("--na-token", extra_na, "additional missing-value tokens");

  // ---- simulate ----
  ScenarioConfig scenario;
  int case_id = 1;
  std::vector<Eigen::Index> sizes;
  std::vector<std::string> method_names;
  std::string sim_format = "table";
  std::string json_path;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo performance grid");
  simulate->add_option("--case", case_id, "data generating process: 1, 2, or 3");
  simulate->add_option("--n", sizes, "sample sizes (one column group per value)");
  simulate->add_option("--j", scenario.n_covariates, "number of covariates: 2 or 5");
  simulate->add_option("--reps", scenario.reps, "replications per cell");
  simulate->add_option("--seed", scenario.seed, "RNG seed");
  simulate->add_option("--rho", scenario.rho, "case-3 covariate correlation");
  simulate->add_option("--methods", method_names, "subset of: anova si-mean si-opt mim");
  simulate->add_option("--threads", scenario.threads, "worker threads (0 = hardware)");
  simulate->add_option("--format", sim_format, "table | json | csv");
  simulate->add_option("--json", json_path, "also write the JSON report to this file");

  // ---- verify ----
  std::uint64_t verify_seed = 1;
  std::vector<Eigen::Index> verify_sizes;
  bool corrupt = false;
  CLI::App* verify = app.add_subcommand("verify", "Run the algebraic identity suite");
  verify->add_option("--seed", verify_seed, "RNG seed");
  verify->add_option("--sizes", verify_sizes, "dataset sizes (default 200 500)");
  verify->add_flag("--self-test-corrupt", corrupt,
                   "inject an artificial deviation (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (analyze->parsed()) {
    if (!pi_values.empty()) {
      request.pi = pi_values;
    }
    if (!impute_values.empty()) {
      request.fixed_values = impute_values;
    }
    if (contrast_pair.size() == 2) {
      request.contrast_t = contrast_pair[0];
      request.contrast_s = contrast_pair[1];
    }
    for (const std::string& token : extra_na) {
      request.na_tokens.push_back(token);
    }
    const rctmiss::LoadedTrial trial = rctmiss::load_trial(request);
    const rctmiss::AnalysisOutput output = rctmiss::run_analysis(trial, request);
    std::cout << output.render();
    return 0;
  }

  if (simulate->parsed()) {
    scenario.scenario = parse_case(case_id);
    if (!method_names.empty()) {
      scenario.methods.clear();
      for (const std::string& name : method_names) {
        scenario.methods.push_back(parse_method(name));
      }
    }
    if (sizes.empty()) {
      sizes.push_back(scenario.n);
    }
    std::vector<SimulationReport> reports;
    for (const Eigen::Index n : sizes) {
      ScenarioConfig cell = scenario;
      cell.n = n;
      reports.push_back(rctmiss::run_monte_carlo(cell));
    }
    const nlohmann::ordered_json json = rctmiss::report_json(reports);
    if (!json_path.empty()) {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) {
        throw rctmiss::ValidationError("cannot open file for writing: " + json_path);
      }
      out << json.dump(2) << "\n";
    }
    if (sim_format == "json") {
      std::cout << json.dump(2) << "\n";
    } else if (sim_format == "csv") {
      std::cout << rctmiss::report_csv(reports);
    } else {
      std::cout << rctmiss::report_table(reports);
    }
    return 0;
  }

  // verify
  if (verify_sizes.empty()) {
    verify_sizes = {200, 500};
  }
  const auto checks = rctmiss::run_identity_suite(verify_seed, verify_sizes, corrupt);
  for (const rctmiss::IdentityCheck& check : checks) {
    std::cout << (check.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(18)
              << check.name << " max deviation " << std::scientific << std::setprecision(3)
              << check.max_deviation << " (tolerance " << check.tolerance << ", "
              << check.datasets << " datasets)\n";
  }
  return rctmiss::all_pass(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rctmiss::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const rctmiss::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
