#pragma once

#include <Eigen/Dense>
#include <functional>

namespace rctmiss {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0;
  bool converged = false;
  int evaluations = 0;
};

// Downhill simplex with the standard reflection/expansion/contraction/shrink
// coefficients (1, 2, 0.5, 0.5). Stops when the simplex diameter falls below
// diameter_tol * (1 + ||best||) or the evaluation budget runs out, and
// returns the best vertex either way. Evaluations returning +inf or NaN are
// treated as worst, so the objective may reject points by throwing inside a
// wrapper instead of aborting the search.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             double diameter_tol, int max_evaluations);

}  // namespace rctmiss
