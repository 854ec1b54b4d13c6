#include "rctmiss/optimal_si.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rctmiss/estimators.hpp"
#include "rctmiss/linalg.hpp"
#include "rctmiss/optim.hpp"
#include "rctmiss/variance.hpp"

namespace rctmiss {

const char* optimal_c_kind_name(OptimalCKind k) {
  switch (k) {
    case OptimalCKind::interior: return "interior";
    case OptimalCKind::observed_mean: return "observed-mean";
    case OptimalCKind::degenerate_large: return "degenerate-large";
  }
  return "?";
}

PopulationMoments1D moments_1d(const TrialDataset& dataset, Eigen::Index j) {
  if (dataset.n_arms() != 2) {
    throw std::invalid_argument("moments_1d: requires exactly two arms");
  }
  if (j < 0 || j >= dataset.n_covariates()) {
    throw std::invalid_argument("moments_1d: covariate index out of range");
  }
  const Eigen::VectorXd rx = dataset.x.col(j);  // stored zeros make this R*X
  const Eigen::VectorXd rj = dataset.r.col(j);
  const Eigen::VectorXd pi = allocation(dataset);

  // Each arm's observed outcomes identify the covariance with that arm's
  // potential outcome; the pi-weighted sum matches the target combination.
  double cov_r_combo = 0;
  double cov_rx_combo = 0;
  const double weight[2] = {pi[1], pi[0]};  // arm 1 enters with pi_2 and vice versa
  for (int a = 1; a <= 2; ++a) {
    const auto rows = arm_rows(dataset, a);
    const Eigen::VectorXd ya = select_rows(dataset.y, rows);
    cov_r_combo += weight[a - 1] * sample_cov(select_rows(rj, rows), ya);
    cov_rx_combo += weight[a - 1] * sample_cov(select_rows(rx, rows), ya);
  }

  PopulationMoments1D m;
  m.tau_R = -cov_r_combo;  // cov(1-R, .) = -cov(R, .)
  m.tau_RX = cov_rx_combo;
  m.mean_R = rj.mean();
  m.var_R = sample_var(rj);

  const double observed = rj.sum();
  m.mean_X_obs = rx.sum() / observed;
  std::vector<double> obs_values;
  obs_values.reserve(static_cast<size_t>(observed));
  for (Eigen::Index i = 0; i < rj.size(); ++i) {
    if (rj[i] == 1.0) {
      obs_values.push_back(rx[i]);
    }
  }
  if (obs_values.size() < 2) {
    throw ValidationError("moments_1d: need at least 2 observed values in the covariate");
  }
  Eigen::Map<const Eigen::VectorXd> obs(obs_values.data(),
                                        static_cast<Eigen::Index>(obs_values.size()));
  m.var_X_obs = sample_var(obs);
  return m;
}

OptimalC1D optimal_c_closed_1d(const PopulationMoments1D& m) {
  if (m.var_R <= 0.0) {
    throw NumericalError("optimal_c_closed_1d: no missingness in this covariate");
  }
  const double key = m.tau_RX + m.tau_R * m.mean_X_obs;
  const double tol = 1e-8 * (1.0 + std::abs(m.tau_RX) + std::abs(m.tau_R * m.mean_X_obs));

  OptimalC1D out;
  // tau_R of exactly zero collapses the closed form to the observed mean;
  // the comparison scales tau_R by the observed mean so both branches use
  // the same units as the tolerance.
  if (std::abs(m.tau_R) * (1.0 + std::abs(m.mean_X_obs)) < tol) {
    out.kind = OptimalCKind::observed_mean;
    out.value = m.mean_X_obs;
    return out;
  }
  if (std::abs(key) < tol) {
    // No finite stationary maximum; far-out values approach the limiting
    // gain. Probe both directions 1e6 observed-SD units away and keep the
    // better one.
    out.kind = OptimalCKind::degenerate_large;
    const double span = 1e6 * std::sqrt(m.var_X_obs);
    const Eigen::Vector2d half(0.5, 0.5);
    const double up = m.mean_X_obs + span;
    const double down = m.mean_X_obs - span;
    out.value = gain_1d(up, m, half) >= gain_1d(down, m, half) ? up : down;
    return out;
  }
  out.kind = OptimalCKind::interior;
  const double numerator =
      m.tau_R * (m.mean_R * m.var_X_obs + m.var_R * m.mean_X_obs * m.mean_X_obs) +
      m.tau_RX * m.var_R * m.mean_X_obs;
  const double denominator = m.var_R * m.mean_X_obs * m.tau_R + m.var_R * m.tau_RX;
  out.value = numerator / denominator;
  return out;
}

double gain_1d(double c, const PopulationMoments1D& m, const Eigen::Vector2d& pi) {
  // var(RX + (1-R)c) through the stored moments: E(R)var(X|R=1) plus
  // var(R)(E(X|R=1) - c)^2.
  const double dev = m.mean_X_obs - c;
  const double imputed_var = m.mean_R * m.var_X_obs + m.var_R * dev * dev;
  const double denom = pi[0] * pi[1] * imputed_var;
  if (denom <= 0.0) {
    throw NumericalError("gain_1d: imputed covariate is constant");
  }
  const double num = m.tau_RX + m.tau_R * c;
  return num * num / denom;
}

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      return a[i] < b[i];
    }
  }
  return false;
}

}  // namespace

NumericOptimum optimal_c_numeric(const TrialDataset& dataset, int t, int s,
                                 const std::optional<Eigen::VectorXd>& init) {
  const Eigen::Index J = dataset.n_covariates();
  const SiVarianceEvaluator eval(dataset, t, s);
  const auto objective = [&](const Eigen::VectorXd& c) {
    try {
      return eval(c);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const Eigen::VectorXd obs = observed_means(dataset.x, dataset.r);
  Eigen::VectorXd obs_sd(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    std::vector<double> values;
    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
      if (dataset.r(i, j) == 1.0) {
        values.push_back(dataset.x(i, j));
      }
    }
    Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
    obs_sd[j] = values.size() >= 2 ? std::sqrt(sample_var(v)) : 1.0;
  }

  std::vector<Eigen::VectorXd> starts;
  if (init.has_value()) {
    if (init->size() != J) {
      throw std::invalid_argument("optimal_c_numeric: init length does not match covariate count");
    }
    starts.push_back(*init);
  }
  starts.push_back(obs);
  starts.push_back(obs + 2.0 * obs_sd);
  starts.push_back(obs - 2.0 * obs_sd);
  try {
    const Eigen::MatrixXd cwi = mim_to_cwi_values(anhecova_mim(dataset));
    starts.push_back(cwi.row(t - 1));
    starts.push_back(cwi.row(s - 1));
  } catch (const NumericalError&) {
    // mim-implied starts undefined; the remaining restarts stand alone
  }

  const int budget = 500 * static_cast<int>(J);
  NumericOptimum best;
  best.objective = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : starts) {
    Eigen::VectorXd step = 0.5 * obs_sd;
    const NelderMeadResult run = nelder_mead(objective, start, step, 1e-6, budget);
    const bool better = run.value < best.objective ||
                        (run.value == best.objective && best.c.size() > 0 &&
                         lex_less(run.x, best.c));
    if (best.c.size() == 0 || better) {
      best.c = run.x;
      best.objective = run.value;
      best.converged = run.converged;
    }
  }
  return best;
}

}  // namespace rctmiss
