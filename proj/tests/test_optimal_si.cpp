#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rctmiss/imputation.hpp"
#include "rctmiss/linalg.hpp"
#include "rctmiss/optimal_si.hpp"
#include "rctmiss/rng.hpp"
#include "rctmiss/simulation.hpp"
#include "rctmiss/variance.hpp"

using namespace rctmiss;

namespace {

// one covariate, two arms, missingness strongly tied to the outcome
TrialDataset prognostic_1d(StreamRng& rng, Eigen::Index n) {
  TrialDataset ds;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, 1);
  ds.r.resize(n, 1);
  ds.pi = Eigen::Vector2d(0.5, 0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 1.0 + 1.4 * rng.next_normal();
    const double e = rng.next_normal();
    const double y1 = 1.0 + 2.0 * x + e;
    const double y2 = 2.0 + 3.5 * x + e;
    const int arm = rng.next_bernoulli(0.5) ? 2 : 1;
    const double p = 1.0 / (1.0 + std::exp(-(0.5 * x + 0.125 * (y1 + y2) - 1.6)));
    const bool obs = rng.next_bernoulli(p);
    ds.arm[i] = arm;
    ds.y[i] = arm == 1 ? y1 : y2;
    ds.x(i, 0) = obs ? x : 0.0;
    ds.r(i, 0) = obs ? 1.0 : 0.0;
  }
  return ds;
}

// missingness independent of everything, covariate prognostic
TrialDataset mcar_1d(StreamRng& rng, Eigen::Index n) {
  TrialDataset ds;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, 1);
  ds.r.resize(n, 1);
  ds.pi = Eigen::Vector2d(0.5, 0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 0.5 + 1.2 * rng.next_normal();
    const bool obs = rng.next_bernoulli(0.7);
    const int arm = rng.next_bernoulli(0.5) ? 2 : 1;
    ds.arm[i] = arm;
    ds.y[i] = 0.5 * arm + 2.0 * x + rng.next_normal();
    ds.x(i, 0) = obs ? x : 0.0;
    ds.r(i, 0) = obs ? 1.0 : 0.0;
  }
  return ds;
}

// outcome independent of both the covariate and its missingness
TrialDataset independent_1d(StreamRng& rng, Eigen::Index n) {
  TrialDataset ds;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, 1);
  ds.r.resize(n, 1);
  ds.pi = Eigen::Vector2d(0.5, 0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 0.5 + 1.2 * rng.next_normal();
    const bool obs = rng.next_bernoulli(0.7);
    const int arm = rng.next_bernoulli(0.5) ? 2 : 1;
    ds.arm[i] = arm;
    ds.y[i] = 0.5 * arm + rng.next_normal();
    ds.x(i, 0) = obs ? x : 0.0;
    ds.r(i, 0) = obs ? 1.0 : 0.0;
  }
  return ds;
}

}  // namespace

TEST_CASE("moments_1d on a fully observed covariate") {
  StreamRng rng(211, 0);
  TrialDataset ds = independent_1d(rng, 400);
  ds.r.setOnes();
  ds = validate(ds);
  const PopulationMoments1D m = moments_1d(ds, 0);
  CHECK(m.tau_R == 0.0);
  CHECK(m.var_R == 0.0);
  CHECK(m.mean_R == 1.0);
  CHECK_THROWS_WITH_AS(optimal_c_closed_1d(m), doctest::Contains("no missingness"),
                       NumericalError);
}

TEST_CASE("moments_1d taus vanish when the outcome ignores covariate and missingness") {
  StreamRng rng(223, 0);
  const TrialDataset ds = validate(independent_1d(rng, 50000));
  const PopulationMoments1D m = moments_1d(ds, 0);
  // Monte Carlo scale of a sample covariance of independent variables
  const double se_r = std::sqrt(sample_var(ds.r.col(0)) * sample_var(ds.y)) /
                      std::sqrt(static_cast<double>(ds.n()));
  const double se_rx = std::sqrt(sample_var(ds.x.col(0)) * sample_var(ds.y)) /
                       std::sqrt(static_cast<double>(ds.n()));
  CHECK(std::abs(m.tau_R) < 3.0 * se_r);
  CHECK(std::abs(m.tau_RX) < 3.0 * se_rx);
}

TEST_CASE("moments_1d matches covariances taken on the retained potential outcomes") {
  ScenarioConfig config;
  config.scenario = Case::case3;
  config.n = 100000;
  config.n_covariates = 2;
  config.seed = 515;
  const auto [raw, truth] = generate(config, 0);
  const TrialDataset ds = validate(raw);
  const PopulationMoments1D m = moments_1d(ds, 0);

  // oracle: both potential outcomes are known for every subject
  const Eigen::VectorXd combo = 0.5 * truth.y2 + 0.5 * truth.y1;
  const Eigen::VectorXd miss = (1.0 - ds.r.col(0).array()).matrix();
  const double tau_r_oracle = oracle::direct_cov(miss, combo);
  const double tau_rx_oracle = oracle::direct_cov(ds.x.col(0), combo);
  CHECK(m.tau_R == doctest::Approx(tau_r_oracle).epsilon(0.02));
  CHECK(m.tau_RX == doctest::Approx(tau_rx_oracle).epsilon(0.02));

  const Eigen::VectorXd x_obs_mean_check = ds.x.col(0);
  CHECK(m.mean_R == doctest::Approx(ds.r.col(0).mean()).epsilon(1e-12));
}

TEST_CASE("closed form collapses to the observed mean when tau_R vanishes") {
  PopulationMoments1D m;
  m.tau_R = 0.0;
  m.tau_RX = 1.7;
  m.mean_X_obs = 2.5;
  m.var_R = 0.2;
  m.var_X_obs = 1.1;
  m.mean_R = 0.7;
  const OptimalC1D c = optimal_c_closed_1d(m);
  CHECK(c.kind == OptimalCKind::observed_mean);
  CHECK(c.value == 2.5);
}

TEST_CASE("closed form detects the degenerate direction and prefers the larger gain") {
  PopulationMoments1D m;
  m.tau_R = 0.8;
  m.mean_X_obs = 1.5;
  m.tau_RX = -m.tau_R * m.mean_X_obs;  // no finite stationary maximum
  m.var_R = 0.21;
  m.var_X_obs = 1.3;
  m.mean_R = 0.7;
  const OptimalC1D c = optimal_c_closed_1d(m);
  CHECK(c.kind == OptimalCKind::degenerate_large);
  CHECK(std::abs(c.value - m.mean_X_obs) > 1e5 * std::sqrt(m.var_X_obs) * 0.99);

  const Eigen::Vector2d half(0.5, 0.5);
  // the observed mean is the *worst* imputation value here: zero gain
  CHECK(gain_1d(-m.tau_RX / m.tau_R, m, half) < 1e-10);
  CHECK(gain_1d(c.value, m, half) > gain_1d(m.mean_X_obs + 1.0, m, half));
  // far-out values approach the limiting gain
  const double limit = m.tau_R * m.tau_R / (0.25 * m.var_R);
  CHECK(gain_1d(c.value, m, half) == doctest::Approx(limit).epsilon(0.01));
}

TEST_CASE("gain_1d is nonnegative, vanishes at the zero-gain valley, and hits its limit") {
  StreamRng rng(227, 0);
  const TrialDataset ds = validate(prognostic_1d(rng, 20000));
  const PopulationMoments1D m = moments_1d(ds, 0);
  REQUIRE(std::abs(m.tau_R) > 0.1);
  const Eigen::Vector2d pi(0.5, 0.5);

  CHECK(gain_1d(-m.tau_RX / m.tau_R, m, pi) < 1e-10);
  const double limit = m.tau_R * m.tau_R / (pi[0] * pi[1] * m.var_R);
  CHECK(gain_1d(m.mean_X_obs + 1e6 * std::sqrt(m.var_X_obs), m, pi) ==
        doctest::Approx(limit).epsilon(0.01));

  const OptimalC1D best = optimal_c_closed_1d(m);
  REQUIRE(best.kind == OptimalCKind::interior);
  for (int probe = 0; probe < 1000; ++probe) {
    const double c = -50.0 + 100.0 * rng.next_uniform();
    const double g = gain_1d(c, m, pi);
    CHECK(g >= 0.0);
    CHECK(gain_1d(best.value, m, pi) >= g);
  }
}

TEST_CASE("gain_1d rejects a constant imputed covariate") {
  PopulationMoments1D m;
  m.tau_R = 0.3;
  m.tau_RX = 0.4;
  m.mean_X_obs = 1.0;
  m.var_R = 0.25;
  m.var_X_obs = 0.0;  // observed values constant
  m.mean_R = 0.5;
  CHECK_THROWS_AS(gain_1d(1.0, m, Eigen::Vector2d(0.5, 0.5)), NumericalError);
}

TEST_CASE("closed form tracks the exhaustive grid minimizer of the variance objective") {
  StreamRng rng(229, 0);
  const TrialDataset ds = validate(prognostic_1d(rng, 20000));
  const PopulationMoments1D m = moments_1d(ds, 0);
  const OptimalC1D closed = optimal_c_closed_1d(m);
  REQUIRE(closed.kind == OptimalCKind::interior);

  const SiVarianceEvaluator eval(ds, 2, 1);
  Eigen::VectorXd c(1);
  double best_c = 0, best_v = std::numeric_limits<double>::infinity();
  for (double g = -50.0; g <= 50.0; g += 0.001) {
    c[0] = g;
    const double v = eval(c);
    if (v < best_v) {
      best_v = v;
      best_c = g;
    }
  }
  CHECK(std::abs(closed.value - best_c) <= 0.001);
}

TEST_CASE("numeric search returns the observed mean when missingness is unrelated to the outcome") {
  StreamRng rng(233, 0);
  const TrialDataset ds = validate(mcar_1d(rng, 10000));
  const NumericOptimum opt = optimal_c_numeric(ds, 2, 1);
  const double observed_mean = observed_means(ds.x, ds.r)[0];
  CHECK(std::abs(opt.c[0] - observed_mean) < 0.05);
}

TEST_CASE("numeric search never ends above its default start") {
  StreamRng rng(239, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const TrialDataset ds = validate(prognostic_1d(rng, 2000));
    const NumericOptimum opt = optimal_c_numeric(ds, 2, 1);
    const ImputationPlan mean_plan = build_plan(ds, Strategy::observed_mean);
    CHECK(opt.objective <= var_si_contrast(ds, mean_plan, 2, 1));
    CHECK(std::isfinite(opt.objective));
  }
}

TEST_CASE("numeric search is deterministic across invocations and honors init") {
  StreamRng rng(241, 0);
  const TrialDataset ds = validate(prognostic_1d(rng, 3000));
  const NumericOptimum a = optimal_c_numeric(ds, 2, 1);
  const NumericOptimum b = optimal_c_numeric(ds, 2, 1);
  CHECK(a.c == b.c);
  CHECK(a.objective == b.objective);

  const NumericOptimum with_init = optimal_c_numeric(ds, 2, 1, Eigen::VectorXd::Zero(1));
  CHECK(with_init.objective <= a.objective + 1e-6 * (1.0 + std::abs(a.objective)));
}

TEST_CASE("moments_1d requires exactly two arms") {
  StreamRng rng(251, 0);
  TrialDataset ds = independent_1d(rng, 90);
  ds.pi.reset();
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    ds.arm[i] = 1 + static_cast<int>(i % 3);
  }
  ds = validate(ds);
  CHECK_THROWS_AS(moments_1d(ds, 0), std::invalid_argument);
}

TEST_CASE("the closed-form optimum never loses to the observed mean") {
  StreamRng rng(257, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const TrialDataset ds = validate(prognostic_1d(rng, 8000));
    const PopulationMoments1D m = moments_1d(ds, 0);
    const OptimalC1D best = optimal_c_closed_1d(m);
    const SiVarianceEvaluator eval(ds, 2, 1);
    Eigen::VectorXd c(1);
    c[0] = best.value;
    const double at_optimum = eval(c);
    c[0] = m.mean_X_obs;
    CHECK(at_optimum <= eval(c) + 1e-9);
  }
}

TEST_CASE("with tau_R zero the gain peaks at the observed mean") {
  PopulationMoments1D m;
  m.tau_R = 0.0;
  m.tau_RX = 0.9;
  m.mean_X_obs = 1.25;
  m.var_R = 0.24;
  m.var_X_obs = 1.4;
  m.mean_R = 0.6;
  const Eigen::Vector2d pi(0.5, 0.5);
  const double peak = gain_1d(m.mean_X_obs, m, pi);
  StreamRng rng(263, 0);
  for (int probe = 0; probe < 500; ++probe) {
    CHECK(peak >= gain_1d(-20.0 + 40.0 * rng.next_uniform(), m, pi));
  }
}
