#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rctmiss/estimators.hpp"
#include "rctmiss/linalg.hpp"
#include "rctmiss/simulation.hpp"
#include "rctmiss/variance.hpp"
#include "test_util.hpp"

using namespace rctmiss;

namespace {

ImputationPlan cross_world_plan(const Eigen::MatrixXd& values) {
  ImputationPlan plan;
  plan.strategy = Strategy::cross_world;
  plan.values = values;
  return plan;
}

TrialDataset permuted(const TrialDataset& ds, const std::vector<Eigen::Index>& order) {
  TrialDataset out = ds;
  for (size_t i = 0; i < order.size(); ++i) {
    const Eigen::Index src = order[i];
    const Eigen::Index dst = static_cast<Eigen::Index>(i);
    out.y[dst] = ds.y[src];
    out.arm[dst] = ds.arm[src];
    out.x.row(dst) = ds.x.row(src);
    out.r.row(dst) = ds.r.row(src);
  }
  return out;
}

}  // namespace

TEST_CASE("normal_quantile hits reference points") {
  CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) < 1e-8);
  CHECK(std::abs(normal_quantile(0.5)) < 1e-12);
  CHECK(normal_quantile(0.025) == doctest::Approx(-normal_quantile(0.975)).epsilon(1e-12));
  CHECK(std::abs(normal_quantile(0.995) - 2.575829303548901) < 1e-8);
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("confidence_interval geometry") {
  const ContrastInference ci = confidence_interval(0.4, 1.0, 100, 0.95);
  CHECK(std::abs((ci.upper - ci.lower) / 2.0 - 0.19600) < 1e-4);
  CHECK(ci.lower <= ci.estimate);
  CHECK(ci.estimate <= ci.upper);
  const double z = normal_quantile(0.975);
  CHECK(ci.upper - ci.lower == doctest::Approx(2.0 * z * ci.se).epsilon(1e-12));

  const ContrastInference flat = confidence_interval(0.4, 0.0, 50, 0.95);
  CHECK(flat.lower == 0.4);
  CHECK(flat.upper == 0.4);

  CHECK_THROWS_AS(confidence_interval(0.0, -1e-9, 10, 0.95), NumericalError);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 0, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 10, 1.0), std::invalid_argument);
}

TEST_CASE("var_anova is the pooled within-arm variance combination") {
  StreamRng rng(71, 0);
  const TrialDataset ds = validate(testutil::random_trial(rng, 80, 2, 2));
  const Eigen::VectorXd pi = allocation(ds);
  const double expected =
      sample_var(select_rows(ds.y, arm_rows(ds, 1))) / pi[0] +
      sample_var(select_rows(ds.y, arm_rows(ds, 2))) / pi[1];
  CHECK(var_anova_contrast(ds, 2, 1) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("var_si scales exactly with the outcome") {
  StreamRng rng(73, 0);
  TrialDataset ds = validate(testutil::random_trial(rng, 150, 3, 2));
  const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
  const double base = var_si_contrast(ds, plan, 2, 1);
  TrialDataset doubled = ds;
  doubled.y *= 2.0;
  CHECK(var_si_contrast(doubled, plan, 2, 1) == 4.0 * base);
}

TEST_CASE("var_si approaches the unadjusted variance when the outcome ignores covariates") {
  StreamRng rng(79, 0);
  TrialDataset ds;
  const Eigen::Index n = 20000;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, 2);
  ds.r.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.arm[i] = rng.next_bernoulli(0.5) ? 2 : 1;
    ds.y[i] = 0.5 * ds.arm[i] + rng.next_normal();
    for (Eigen::Index j = 0; j < 2; ++j) {
      ds.r(i, j) = rng.next_bernoulli(0.75) ? 1.0 : 0.0;
      ds.x(i, j) = ds.r(i, j) * rng.next_normal();
    }
  }
  ds = validate(ds);
  const double adjusted = var_si_contrast(ds, build_plan(ds, Strategy::observed_mean), 2, 1);
  const double plain = var_anova_contrast(ds, 2, 1);
  CHECK(adjusted == doctest::Approx(plain).epsilon(0.02));
}

TEST_CASE("equal plan rows collapse var_cwi to var_si") {
  StreamRng rng(83, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const TrialDataset ds = validate(testutil::random_trial(rng, 120 + 40 * rep, 3, 2));
    const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
    const double si = var_si_contrast(ds, plan, 2, 1);
    const double cwi = var_cwi_contrast(ds, plan, 2, 1);
    CHECK(std::abs(si - cwi) <= 1e-12 * std::max(1.0, std::abs(si)));
  }
}

TEST_CASE("with no missing data every variance route is the classical one") {
  StreamRng rng(89, 0);
  TrialDataset ds = testutil::random_trial(rng, 120, 2, 2);
  ds.r.setOnes();
  ds = validate(ds);
  const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
  const double si = var_si_contrast(ds, plan, 2, 1);
  const double cwi = var_cwi_contrast(ds, plan, 2, 1);
  const EstimateResult mim = anhecova_mim(ds);
  const double vm = var_mim_contrast(ds, mim, 2, 1);
  CHECK(std::abs(si - cwi) < 1e-10 * si);
  CHECK(std::abs(si - vm) < 1e-10 * si);

  // classical form assembled by hand from raw covariates
  const EstimateResult fit = anhecova_si(ds, plan);
  const Eigen::VectorXd pi = allocation(ds);
  double expected = 0;
  for (int a = 1; a <= 2; ++a) {
    const auto rows = arm_rows(ds, a);
    const Eigen::VectorXd resid =
        select_rows(ds.y, rows) -
        select_rows(ds.x, rows) * fit.betas.row(a - 1).transpose();
    expected += sample_var(resid) / pi[a - 1];
  }
  const Eigen::VectorXd d = (fit.betas.row(1) - fit.betas.row(0)).transpose();
  expected += d.dot(sample_cov_matrix(ds.x) * d);
  CHECK(si == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("mim variance agrees with the cross-world variance at the implied values as n grows") {
  // The two plug-ins estimate the same limit but differ by O(1/sqrt(n)):
  // the cross-arm slopes refit within the opposite arm. Rates measured with
  // this generator: ~2.5e-2 at n=2000, ~1.2e-3 at n=50000.
  double rel_small = 0, rel_big = 0;
  for (int rep = 0; rep < 3; ++rep) {
    ScenarioConfig config;
    config.scenario = Case::case3;
    config.n_covariates = 5;
    config.seed = 7;

    config.n = 2000;
    {
      const TrialDataset ds = validate(generate(config, rep).first);
      const EstimateResult mim = anhecova_mim(ds);
      const double vm = var_mim_contrast(ds, mim, 2, 1);
      const double vc = var_cwi_contrast(ds, cross_world_plan(mim_to_cwi_values(mim)), 2, 1);
      rel_small = std::max(rel_small, std::abs(vm - vc) / vm);
    }
    config.n = 50000;
    {
      const TrialDataset ds = validate(generate(config, rep).first);
      const EstimateResult mim = anhecova_mim(ds);
      const double vm = var_mim_contrast(ds, mim, 2, 1);
      const double vc = var_cwi_contrast(ds, cross_world_plan(mim_to_cwi_values(mim)), 2, 1);
      rel_big = std::max(rel_big, std::abs(vm - vc) / vm);
    }
  }
  CHECK(rel_big < 4e-3);
  CHECK(rel_big < rel_small);
}

TEST_CASE("variance estimates are deterministic and permutation-stable") {
  StreamRng rng(97, 0);
  const TrialDataset ds = validate(testutil::random_trial(rng, 140, 3, 2));
  const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
  const EstimateResult mim = anhecova_mim(ds);

  const double si = var_si_contrast(ds, plan, 2, 1);
  CHECK(var_si_contrast(ds, plan, 2, 1) == si);  // bitwise repeatable

  std::vector<Eigen::Index> order(static_cast<size_t>(ds.n()));
  std::iota(order.begin(), order.end(), 0);
  StreamRng shuffle_rng(97, 1);
  for (size_t i = order.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(shuffle_rng.next_uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  const TrialDataset shuffled = permuted(ds, order);
  CHECK(var_si_contrast(shuffled, plan, 2, 1) == doctest::Approx(si).epsilon(1e-10));
  const EstimateResult mim_shuffled = anhecova_mim(shuffled);
  CHECK(var_mim_contrast(shuffled, mim_shuffled, 2, 1) ==
        doctest::Approx(var_mim_contrast(ds, mim, 2, 1)).epsilon(1e-10));
}

TEST_CASE("variance estimators reject bad contrasts and plans") {
  StreamRng rng(101, 0);
  const TrialDataset ds = validate(testutil::random_trial(rng, 90, 2, 2));
  const ImputationPlan plan = build_plan(ds, Strategy::observed_mean);
  CHECK_THROWS_AS(var_si_contrast(ds, plan, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(var_si_contrast(ds, plan, 3, 1), std::invalid_argument);
  const ImputationPlan uneven = build_plan(ds, Strategy::arm_mean);
  CHECK_THROWS_AS(var_si_contrast(ds, uneven, 2, 1), std::invalid_argument);
}

TEST_CASE("cross-world variance at the implied values is calibrated against Monte Carlo") {
  // plug-in at a large sample vs the spread of the estimator across
  // replications at n=1000
  ScenarioConfig big;
  big.scenario = Case::case3;
  big.n = 100000;
  big.n_covariates = 2;
  big.seed = 4242;
  const TrialDataset ds = validate(generate(big, 0).first);
  const EstimateResult mim_big = anhecova_mim(ds);
  const double sigma2 =
      var_cwi_contrast(ds, cross_world_plan(mim_to_cwi_values(mim_big)), 2, 1);

  ScenarioConfig mc;
  mc.scenario = Case::case3;
  mc.n = 1000;
  mc.n_covariates = 2;
  mc.seed = 4242;
  mc.reps = 5000;
  mc.methods = {SimMethod::mim};  // identical to cross-world at the implied values
  const SimulationReport report = run_monte_carlo(mc);
  REQUIRE(report.rows[0].sd_defined);
  const double mc_var = report.rows[0].sd * report.rows[0].sd * 1000.0;
  CHECK(std::abs(sigma2 - mc_var) / mc_var < 0.05);
}
