#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rctmiss/estimators.hpp"
#include "rctmiss/imputation.hpp"
#include "rctmiss/rng.hpp"
#include "rctmiss/simulation.hpp"

using namespace rctmiss;

TEST_CASE("impute passes observed entries through bit-identical") {
  Eigen::MatrixXd x(2, 2);
  x << 0.1, -2.75, 3.0, 5.5;
  const Eigen::MatrixXd full = Eigen::MatrixXd::Ones(2, 2);
  const Eigen::MatrixXd out = impute(x, full, Eigen::Vector2d(9, 9));
  CHECK(out == x);
}

TEST_CASE("impute writes the imputation value at masked cells") {
  Eigen::MatrixXd x(1, 2);
  x << 0, 0;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(1, 2);
  const Eigen::MatrixXd out = impute(x, r, Eigen::Vector2d(7, -1));
  CHECK(out(0, 0) == 7);
  CHECK(out(0, 1) == -1);
}

TEST_CASE("impute applies the definition entrywise") {
  Eigen::MatrixXd x(2, 2);
  x << 3, 0, 0, 5;
  Eigen::MatrixXd r(2, 2);
  r << 1, 0, 0, 1;
  const Eigen::MatrixXd out = impute(x, r, Eigen::Vector2d(9, 9));
  CHECK(out(0, 0) == 3);
  CHECK(out(0, 1) == 9);
  CHECK(out(1, 0) == 9);
  CHECK(out(1, 1) == 5);
}

TEST_CASE("two imputation vectors differ only at masked cells") {
  StreamRng rng(31, 0);
  Eigen::MatrixXd x(50, 3), r(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      r(i, j) = rng.next_bernoulli(0.7) ? 1.0 : 0.0;
      x(i, j) = r(i, j) * rng.next_normal();
    }
  }
  const Eigen::MatrixXd a = impute(x, r, Eigen::Vector3d(1, 2, 3));
  const Eigen::MatrixXd b = impute(x, r, Eigen::Vector3d(-4, 0, 9));
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (r(i, j) == 1.0) {
        CHECK(a(i, j) == b(i, j));
      } else {
        CHECK(a(i, j) != b(i, j));
      }
    }
  }
}

TEST_CASE("impute rejects non-finite values") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
  Eigen::MatrixXd r = Eigen::MatrixXd::Ones(2, 1);
  Eigen::VectorXd c(1);
  c << std::nan("");
  CHECK_THROWS_AS(impute(x, r, c), std::invalid_argument);
}

TEST_CASE("observed_means on tiny columns") {
  Eigen::MatrixXd x(3, 2);
  x << 2, 1, 0, 2, 4, 3;
  Eigen::MatrixXd r(3, 2);
  r << 1, 1, 0, 1, 1, 1;
  const Eigen::VectorXd means = observed_means(x, r);
  CHECK(means[0] == doctest::Approx(3));
  CHECK(means[1] == doctest::Approx(2));
}

TEST_CASE("observed_means matches the masked-loop reference on random data") {
  StreamRng rng(77, 0);
  Eigen::MatrixXd x(500, 3), r(500, 3);
  for (Eigen::Index i = 0; i < 500; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      r(i, j) = rng.next_bernoulli(0.7) ? 1.0 : 0.0;
      x(i, j) = r(i, j) * (rng.next_normal() + 0.3 * static_cast<double>(j));
    }
  }
  const Eigen::VectorXd means = observed_means(x, r);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(std::abs(means[j] - oracle::masked_mean(x.col(j), r.col(j))) < 1e-12);
  }
}

TEST_CASE("observed_means rejects a fully missing column") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(observed_means(x, r), ValidationError);
}

TEST_CASE("arm_means on a hand-built two-arm dataset") {
  TrialDataset ds;
  ds.y = Eigen::Vector4d(1, 2, 3, 4);
  ds.arm.resize(4);
  ds.arm << 1, 1, 2, 2;
  ds.x.resize(4, 2);
  ds.x << 2, 0, 4, 1, 6, 7, 8, 9;
  ds.r.resize(4, 2);
  ds.r << 1, 0, 1, 1, 1, 1, 1, 1;
  ds = validate(ds);
  const Eigen::VectorXd m1 = arm_means(ds, 1);
  CHECK(m1[0] == doctest::Approx(3));
  CHECK(m1[1] == doctest::Approx(1));

  SUBCASE("single-arm restriction equals the overall observed mean") {
    TrialDataset solo = ds;
    solo.arm.setConstant(1);
    solo = validate(solo);
    const Eigen::VectorXd all = observed_means(solo.x, solo.r);
    const Eigen::VectorXd arm1 = arm_means(solo, 1);
    CHECK(arm1[0] == doctest::Approx(all[0]));
    CHECK(arm1[1] == doctest::Approx(all[1]));
  }

  SUBCASE("empty observed set names the arm and covariate") {
    TrialDataset bad = ds;
    bad.r(0, 1) = 0;
    bad.r(1, 1) = 0;  // covariate 2 unobserved in arm 1
    bad = validate(bad);
    CHECK_THROWS_WITH_AS(arm_means(bad, 1),
                         doctest::Contains("arm 1 has no observed values for covariate 2"),
                         ValidationError);
  }
}

TEST_CASE("arm means balance across arms on generated data") {
  ScenarioConfig config;
  config.scenario = Case::case1;
  config.n = 2000;
  config.n_covariates = 5;
  config.seed = 2028;
  const TrialDataset ds = validate(generate(config, 0).first);
  const Eigen::VectorXd m1 = arm_means(ds, 1);
  const Eigen::VectorXd m2 = arm_means(ds, 2);
  for (Eigen::Index j = 0; j < 5; ++j) {
    CHECK(std::abs(m1[j] - m2[j]) < 0.2);
  }
}

TEST_CASE("build_plan fills values per strategy") {
  TrialDataset ds;
  ds.y = Eigen::Vector4d(1, 2, 3, 4);
  ds.arm.resize(4);
  ds.arm << 1, 1, 2, 2;
  ds.x.resize(4, 1);
  ds.x << 2, 0, 4, 4;
  ds.r.resize(4, 1);
  ds.r << 1, 0, 1, 1;
  ds = validate(ds);

  const ImputationPlan mean_plan = build_plan(ds, Strategy::observed_mean);
  CHECK(mean_plan.values(0, 0) == doctest::Approx(10.0 / 3));
  CHECK(mean_plan.values(1, 0) == mean_plan.values(0, 0));
  CHECK(mean_plan.single());

  const ImputationPlan mim_plan = build_plan(ds, Strategy::mim);
  CHECK(mim_plan.values.isZero(0.0));

  Eigen::MatrixXd fixed(1, 1);
  fixed << 1.5;
  const ImputationPlan fixed_plan = build_plan(ds, Strategy::fixed, fixed);
  CHECK(fixed_plan.values(0, 0) == 1.5);
  CHECK(fixed_plan.values(1, 0) == 1.5);

  const ImputationPlan arm_plan = build_plan(ds, Strategy::arm_mean);
  CHECK(arm_plan.values(0, 0) == doctest::Approx(2));
  CHECK(arm_plan.values(1, 0) == doctest::Approx(4));

  CHECK_THROWS_AS(build_plan(ds, Strategy::fixed), std::invalid_argument);
  Eigen::MatrixXd bad(1, 1);
  bad << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(build_plan(ds, Strategy::fixed, bad), std::invalid_argument);
}

TEST_CASE("with a full mask every strategy produces the same estimates") {
  StreamRng rng(404, 0);
  TrialDataset ds;
  const Eigen::Index n = 80;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, 2);
  ds.r = Eigen::MatrixXd::Ones(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.arm[i] = i % 2 == 0 ? 1 : 2;
    ds.x(i, 0) = rng.next_normal();
    ds.x(i, 1) = rng.next_normal();
    ds.y[i] = 1.0 * ds.arm[i] + 0.7 * ds.x(i, 0) - 0.4 * ds.x(i, 1) + 0.3 * rng.next_normal();
  }
  ds = validate(ds);

  Eigen::MatrixXd fixed(1, 2);
  fixed << -3.0, 42.0;
  const EstimateResult a = anhecova_si(ds, build_plan(ds, Strategy::observed_mean));
  const EstimateResult b = anhecova_si(ds, build_plan(ds, Strategy::fixed, fixed));
  CHECK(a.theta == b.theta);
}
