#include "rctmiss/report.hpp"

#include <iomanip>

#include "rctmiss/csv.hpp"
#include <sstream>
#include <stdexcept>

namespace rctmiss {

nlohmann::ordered_json report_json(const std::vector<SimulationReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("report_json: no reports");
  }
  const ScenarioConfig& base = reports.front().config;
  nlohmann::ordered_json config;
  config["case"] = case_name(base.scenario);
  config["j"] = base.n_covariates;
  config["reps"] = base.reps;
  config["seed"] = base.seed;
  config["rho"] = base.rho;
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (const SimMethod m : base.methods) {
    methods.push_back(sim_method_name(m));
  }
  config["methods"] = methods;
  nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
  for (const SimulationReport& report : reports) {
    sizes.push_back(report.config.n);
  }
  config["n"] = sizes;

  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const SimulationReport& report : reports) {
    for (const MethodReport& row : report.rows) {
      nlohmann::ordered_json entry;
      entry["n"] = report.config.n;
      entry["method"] = sim_method_name(row.method);
      entry["bias"] = row.bias;
      entry["sd"] = row.sd_defined ? nlohmann::ordered_json(row.sd) : nlohmann::ordered_json();
      entry["mean_se"] = row.mean_se;
      entry["coverage_pct"] = row.coverage_pct;
      entry["included"] = row.included;
      entry["excluded"] = row.excluded;
      results.push_back(entry);
    }
  }

  nlohmann::ordered_json root;
  root["config"] = config;
  root["results"] = results;
  root["diagnostics"] = nlohmann::ordered_json{{"true_contrast", 1.0}};
  return root;
}

std::string report_table(const std::vector<SimulationReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("report_table: no reports");
  }
  std::ostringstream os;
  const ScenarioConfig& base = reports.front().config;
  os << "scenario: " << case_name(base.scenario) << "   covariates: " << base.n_covariates
     << "   reps: " << base.reps << "   seed: " << base.seed;
  if (base.scenario == Case::case3) {
    os << "   rho: " << base.rho;
  }
  os << "\n";

  os << std::left << std::setw(10) << "method";
  for (const SimulationReport& report : reports) {
    std::ostringstream head;
    head << "n=" << report.config.n;
    os << std::right << std::setw(9) << head.str() << std::setw(8) << "bias" << std::setw(8)
       << "sd" << std::setw(8) << "se" << std::setw(7) << "cp";
  }
  os << "\n";

  for (size_t m = 0; m < base.methods.size(); ++m) {
    os << std::left << std::setw(10) << sim_method_name(base.methods[m]);
    for (const SimulationReport& report : reports) {
      const MethodReport& row = report.rows[m];
      os << std::right << std::setw(9) << "" << std::fixed << std::setprecision(3)
         << std::setw(8) << row.bias << std::setw(8);
      if (row.sd_defined) {
        os << row.sd;
      } else {
        os << "--";
      }
      os << std::setw(8) << row.mean_se << std::setprecision(1) << std::setw(7)
         << row.coverage_pct;
    }
    os << "\n";
  }

  double wall = 0;
  int excluded = 0;
  for (const SimulationReport& report : reports) {
    wall += report.wall_seconds;
    for (const MethodReport& row : report.rows) {
      excluded += row.excluded;
    }
  }
  if (excluded > 0) {
    os << "excluded replications (summed over methods): " << excluded << "\n";
  }
  os << std::fixed << std::setprecision(1) << "wall time: " << wall << " s\n";
  return os.str();
}

std::string report_csv(const std::vector<SimulationReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("report_csv: no reports");
  }
  std::ostringstream os;
  os << "case,j,reps,seed,n,method,bias,sd,mean_se,coverage_pct,included,excluded\n";
  for (const SimulationReport& report : reports) {
    const ScenarioConfig& config = report.config;
    for (const MethodReport& row : report.rows) {
      os << case_name(config.scenario) << ',' << config.n_covariates << ',' << config.reps
         << ',' << config.seed << ',' << config.n << ',' << sim_method_name(row.method) << ','
         << format_double(row.bias) << ',' << (row.sd_defined ? format_double(row.sd) : "")
         << ',' << format_double(row.mean_se) << ',' << format_double(row.coverage_pct) << ','
         << row.included << ',' << row.excluded << "\n";
    }
  }
  return os.str();
}

}  // namespace rctmiss
