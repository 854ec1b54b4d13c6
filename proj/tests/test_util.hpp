#pragma once

// Shared dataset builders for the unit tests.

#include <Eigen/Dense>
#include <cmath>

#include "rctmiss/dataset.hpp"
#include "rctmiss/rng.hpp"

namespace testutil {

// k-arm dataset with arm-specific slopes, prognostic missingness, and junk
// stored under the mask (validate() zeroes it).
inline rctmiss::TrialDataset random_trial(rctmiss::StreamRng& rng, Eigen::Index n,
                                          Eigen::Index J, int k) {
  rctmiss::TrialDataset ds;
  ds.y.resize(n);
  ds.arm.resize(n);
  ds.x.resize(n, J);
  ds.r.resize(n, J);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int arm = 1 + static_cast<int>(rng.next_uniform() * k);
    ds.arm[i] = arm > k ? k : arm;
    const double shared = rng.next_normal();
    double y = 1.5 * ds.arm[i] + 0.4 * rng.next_normal();
    for (Eigen::Index j = 0; j < J; ++j) {
      const double x = 0.7 * shared + rng.next_normal() + 0.2 * static_cast<double>(j);
      const bool observed = rng.next_bernoulli(1.0 / (1.0 + std::exp(-(0.7 * x + 0.8))));
      y += (1.0 + 0.4 * ds.arm[i] + 0.3 * static_cast<double>(j)) * x;
      y += (0.9 + 0.5 * ds.arm[i]) * (observed ? 1.0 : 0.0);
      ds.x(i, j) = observed ? x : 1e3 * rng.next_normal();
      ds.r(i, j) = observed ? 1.0 : 0.0;
    }
    ds.y[i] = y;
  }
  return ds;
}

}  // namespace testutil
