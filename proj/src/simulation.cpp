#include "rctmiss/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "rctmiss/estimators.hpp"
#include "rctmiss/imputation.hpp"
#include "rctmiss/optimal_si.hpp"
#include "rctmiss/rng.hpp"
#include "rctmiss/variance.hpp"

namespace rctmiss {

const char* case_name(Case c) {
  switch (c) {
    case Case::case1: return "case1";
    case Case::case2: return "case2";
    case Case::case3: return "case3";
  }
  return "?";
}

const char* sim_method_name(SimMethod m) {
  switch (m) {
    case SimMethod::anova: return "anova";
    case SimMethod::si_mean: return "si-mean";
    case SimMethod::si_opt: return "si-opt";
    case SimMethod::mim: return "mim";
  }
  return "?";
}

namespace {

constexpr double kMean[5] = {0.1, 0.2, 0.2, 0.3, 0.3};
constexpr double kVar[5] = {2.0, 2.0, 1.0, 2.0, 1.0};
constexpr double kObservedProb[5] = {0.8, 0.7, 0.75, 0.65, 0.85};

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_config(const ScenarioConfig& config) {
  if (config.reps < 1) {
    throw std::invalid_argument("scenario: reps must be at least 1");
  }
  if (config.n < 20) {
    throw std::invalid_argument("scenario: n must be at least 20");
  }
  if (config.n_covariates != 2 && config.n_covariates != 5) {
    throw std::invalid_argument("scenario: the covariate count must be 2 or 5");
  }
  if (!(config.rho > -1.0 && config.rho < 1.0)) {
    throw std::invalid_argument("scenario: rho must lie in (-1,1)");
  }
}

}  // namespace

std::pair<TrialDataset, TruthRecord> generate(const ScenarioConfig& config, int rep_index) {
  check_config(config);
  const Eigen::Index n = config.n;
  const int J = config.n_covariates;
  StreamRng rng(config.seed, static_cast<std::uint64_t>(rep_index));

  Eigen::MatrixXd chol;  // case3: Cholesky factor of the exchangeable correlation
  if (config.scenario == Case::case3) {
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(5, 5, config.rho);
    corr.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("scenario: correlation matrix is not positive definite");
    }
    chol = llt.matrixL();
  }

  TrialDataset ds;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, J);
  ds.r.resize(n, J);
  ds.pi = Eigen::Vector2d(0.5, 0.5);
  TruthRecord truth;
  truth.y1.resize(n);
  truth.y2.resize(n);
  truth.x_full.resize(n, 5);

  double xi[5];
  double z[5];
  for (Eigen::Index i = 0; i < n; ++i) {
    // All five covariates are always generated; a two-covariate run exposes
    // only the first two while the outcomes keep using all five.
    if (config.scenario == Case::case3) {
      for (int j = 0; j < 5; ++j) {
        z[j] = rng.next_normal();
      }
      for (int j = 0; j < 5; ++j) {
        double acc = 0;
        for (int l = 0; l <= j; ++l) {
          acc += chol(j, l) * z[l];
        }
        xi[j] = kMean[j] + std::sqrt(kVar[j]) * acc;
      }
    } else {
      for (int j = 0; j < 5; ++j) {
        xi[j] = kMean[j] + std::sqrt(kVar[j]) * rng.next_normal();
      }
    }
    const double e1 = rng.next_normal();
    const double e2 = rng.next_normal();

    double y1 = 0, y2 = 0;
    if (config.scenario == Case::case3) {
      y1 = xi[0] * xi[0] - 0.5 * xi[0] + xi[1] + xi[2] * xi[2] - 0.5 * xi[3] + xi[4] + e1;
      y2 = 4.0 + xi[0] + xi[1] + xi[2] + 0.5 * xi[3] - xi[4] + e2;
    } else {
      y1 = xi[0] * xi[0] - 0.5 * xi[0] + xi[1] + xi[2] * xi[2] - 5.0 * xi[3] + 5.0 * xi[4] + e1;
      y2 = 3.85 + xi[0] + xi[1] + xi[2] + 0.5 * xi[3] - xi[4] + e2;
    }

    const int arm = rng.next_bernoulli(0.5) ? 2 : 1;

    double observed[5];
    for (int j = 0; j < 5; ++j) {
      double p = 0;
      switch (config.scenario) {
        case Case::case1:
          p = kObservedProb[j];
          break;
        case Case::case2:
          p = expit(0.5 * xi[j] + 1.0);
          break;
        case Case::case3:
          p = expit(0.5 * (y1 + y2) - 2.0 * xi[j] - 2.0);
          break;
      }
      observed[j] = rng.next_bernoulli(p) ? 1.0 : 0.0;
    }

    ds.y[i] = arm == 1 ? y1 : y2;
    ds.arm[i] = arm;
    for (int j = 0; j < J; ++j) {
      ds.r(i, j) = observed[j];
      ds.x(i, j) = observed[j] * xi[j];
    }
    truth.y1[i] = y1;
    truth.y2[i] = y2;
    for (int j = 0; j < 5; ++j) {
      truth.x_full(i, j) = xi[j];
    }
  }
  return {std::move(ds), std::move(truth)};
}

namespace {

struct RepOutcome {
  double estimate = 0;
  double se = 0;
  bool ok = false;
};

RepOutcome run_method(const TrialDataset& ds, SimMethod method) {
  RepOutcome out;
  try {
    double sigma2 = 0;
    switch (method) {
      case SimMethod::anova: {
        out.estimate = contrast(anova(ds), 2, 1);
        sigma2 = var_anova_contrast(ds, 2, 1);
        break;
      }
      case SimMethod::si_mean: {
        const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
        out.estimate = contrast(anhecova_si(ds, plan), 2, 1);
        sigma2 = var_si_contrast(ds, plan, 2, 1);
        break;
      }
      case SimMethod::si_opt: {
        const NumericOptimum opt = optimal_c_numeric(ds, 2, 1);
        if (!std::isfinite(opt.objective)) {
          return out;
        }
        const ImputationPlan plan =
            build_plan(ds, Strategy::fixed, Eigen::MatrixXd(opt.c.transpose()));
        out.estimate = contrast(anhecova_si(ds, plan), 2, 1);
        sigma2 = opt.objective;
        break;
      }
      case SimMethod::mim: {
        const EstimateResult res = anhecova_mim(ds);
        out.estimate = contrast(res, 2, 1);
        sigma2 = var_mim_contrast(ds, res, 2, 1);
        break;
      }
    }
    out.se = std::sqrt(sigma2 / static_cast<double>(ds.n()));
    out.ok = true;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

SimulationReport run_monte_carlo(const ScenarioConfig& config) {
  check_config(config);
  const auto t0 = std::chrono::steady_clock::now();
  const int reps = config.reps;
  const int n_methods = static_cast<int>(config.methods.size());

  std::vector<RepOutcome> cells(static_cast<size_t>(reps) * n_methods);

  unsigned workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  if (workers == 0) {
    workers = 1;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(reps));

  std::atomic<int> next{0};
  auto worker_loop = [&] {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) {
        return;
      }
      TrialDataset ds;
      bool generated = false;
      try {
        ds = validate(generate(config, rep).first);
        generated = true;
      } catch (const std::exception&) {
        generated = false;
      }
      for (int m = 0; m < n_methods; ++m) {
        RepOutcome& cell = cells[static_cast<size_t>(rep) * n_methods + m];
        cell = generated ? run_method(ds, config.methods[static_cast<size_t>(m)]) : RepOutcome{};
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back(worker_loop);
  }
  for (std::thread& th : pool) {
    th.join();
  }

  const double z95 = normal_quantile(0.975);
  SimulationReport report;
  report.config = config;
  for (int m = 0; m < n_methods; ++m) {
    MethodReport row;
    row.method = config.methods[static_cast<size_t>(m)];
    double sum = 0, se_sum = 0;
    int covered = 0;
    int included = 0;
    for (int rep = 0; rep < reps; ++rep) {
      const RepOutcome& cell = cells[static_cast<size_t>(rep) * n_methods + m];
      if (!cell.ok) {
        continue;
      }
      ++included;
      sum += cell.estimate;
      se_sum += cell.se;
      if (std::abs(cell.estimate - 1.0) <= z95 * cell.se) {
        ++covered;
      }
    }
    row.included = included;
    row.excluded = reps - included;
    if (included > 0) {
      const double mean = sum / included;
      row.bias = mean - 1.0;
      row.mean_se = se_sum / included;
      row.coverage_pct = 100.0 * covered / included;
      if (included >= 2) {
        double ss = 0;
        for (int rep = 0; rep < reps; ++rep) {
          const RepOutcome& cell = cells[static_cast<size_t>(rep) * n_methods + m];
          if (cell.ok) {
            ss += (cell.estimate - mean) * (cell.estimate - mean);
          }
        }
        row.sd = std::sqrt(ss / (included - 1));
        row.sd_defined = true;
      }
    }
    report.rows.push_back(row);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace rctmiss
