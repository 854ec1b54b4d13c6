#include "rctmiss/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rctmiss {

namespace {

double guarded(const std::function<double(const Eigen::VectorXd&)>& f,
               const Eigen::VectorXd& x, int& evaluations) {
  ++evaluations;
  const double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             double diameter_tol, int max_evaluations) {
  const Eigen::Index dim = start.size();
  const int n_vertices = static_cast<int>(dim) + 1;

  std::vector<Eigen::VectorXd> vertex(n_vertices, start);
  std::vector<double> value(n_vertices);
  int evaluations = 0;

  for (int v = 1; v < n_vertices; ++v) {
    double h = step[v - 1];
    if (h == 0.0) {
      h = 0.5;
    }
    vertex[v][v - 1] += h;
  }
  for (int v = 0; v < n_vertices; ++v) {
    value[v] = guarded(objective, vertex[v], evaluations);
  }

  std::vector<int> order(n_vertices);
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return value[a] < value[b]; });
    std::vector<Eigen::VectorXd> vx(n_vertices);
    std::vector<double> vv(n_vertices);
    for (int i = 0; i < n_vertices; ++i) {
      vx[i] = vertex[order[i]];
      vv[i] = value[order[i]];
    }
    vertex.swap(vx);
    value.swap(vv);
  };

  NelderMeadResult result;
  bool converged = false;
  while (evaluations < max_evaluations) {
    sort_vertices();

    double diameter = 0;
    for (int v = 1; v < n_vertices; ++v) {
      diameter = std::max(diameter, (vertex[v] - vertex[0]).norm());
    }
    if (diameter < diameter_tol * (1.0 + vertex[0].norm())) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int v = 0; v < n_vertices - 1; ++v) {
      centroid += vertex[v];
    }
    centroid /= static_cast<double>(n_vertices - 1);

    const Eigen::VectorXd& worst = vertex[n_vertices - 1];
    const Eigen::VectorXd reflected = centroid + (centroid - worst);
    const double f_reflected = guarded(objective, reflected, evaluations);

    if (f_reflected < value[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (reflected - centroid);
      const double f_expanded = guarded(objective, expanded, evaluations);
      if (f_expanded < f_reflected) {
        vertex[n_vertices - 1] = expanded;
        value[n_vertices - 1] = f_expanded;
      } else {
        vertex[n_vertices - 1] = reflected;
        value[n_vertices - 1] = f_reflected;
      }
    } else if (f_reflected < value[n_vertices - 2]) {
      vertex[n_vertices - 1] = reflected;
      value[n_vertices - 1] = f_reflected;
    } else {
      const bool outside = f_reflected < value[n_vertices - 1];
      const Eigen::VectorXd contracted =
          outside ? centroid + 0.5 * (reflected - centroid)
                  : centroid + 0.5 * (worst - centroid);
      const double f_contracted = guarded(objective, contracted, evaluations);
      const double bar = outside ? f_reflected : value[n_vertices - 1];
      if (f_contracted <= bar) {
        vertex[n_vertices - 1] = contracted;
        value[n_vertices - 1] = f_contracted;
      } else {
        for (int v = 1; v < n_vertices; ++v) {
          vertex[v] = vertex[0] + 0.5 * (vertex[v] - vertex[0]);
          value[v] = guarded(objective, vertex[v], evaluations);
          if (evaluations >= max_evaluations) {
            break;
          }
        }
      }
    }
  }

  sort_vertices();
  result.x = vertex[0];
  result.value = value[0];
  result.converged = converged;
  result.evaluations = evaluations;
  return result;
}

}  // namespace rctmiss
