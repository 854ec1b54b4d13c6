#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rctmiss {

struct IdentityCheck {
  std::string name;
  double max_deviation = 0;
  double tolerance = 0;
  int datasets = 0;
  bool pass = false;
};

// Exercises the algebraic identities on freshly generated datasets:
//   mim-cwi          per-arm agreement of the cross-world estimator at the
//                    mim-implied values with the mim estimator
//   mim-invariance   bit-identical mim estimates after perturbing masked
//                    covariate cells before ingestion
//   si-reduction     cross-world with equal rows reproduces single
//                    imputation exactly
//   shift-invariance ancova contrast unchanged by shifting covariates
// `corrupt` injects an artificial deviation (harness self-test).
std::vector<IdentityCheck> run_identity_suite(std::uint64_t seed,
                                              const std::vector<Eigen::Index>& sizes,
                                              bool corrupt = false);

bool all_pass(const std::vector<IdentityCheck>& checks);

}  // namespace rctmiss
