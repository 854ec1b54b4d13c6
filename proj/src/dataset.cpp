#include "rctmiss/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rctmiss {

bool ReducedIndicators::is_retained(Eigen::Index j) const {
  return std::find(columns.begin(), columns.end(), j) != columns.end();
}

Eigen::Index ReducedIndicators::retained_position(Eigen::Index j) const {
  const auto it = std::find(columns.begin(), columns.end(), j);
  return it == columns.end() ? Eigen::Index(-1)
                             : static_cast<Eigen::Index>(it - columns.begin());
}

TrialDataset validate(TrialDataset dataset) {
  const Eigen::Index n = dataset.y.size();
  if (dataset.arm.size() != n || dataset.x.rows() != n || dataset.r.rows() != n) {
    throw ValidationError("y, arm, x, and r must have the same number of rows");
  }
  if (dataset.x.cols() != dataset.r.cols()) {
    throw ValidationError("x and r must have the same number of columns");
  }
  if (n == 0) {
    throw ValidationError("dataset is empty");
  }
  const Eigen::Index J = dataset.x.cols();

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const double v = dataset.r(i, j);
      if (v != 0.0 && v != 1.0) {
        std::ostringstream msg;
        msg << "mask entry at row " << i + 1 << ", covariate " << j + 1
            << " is " << v << "; must be 0 or 1";
        throw ValidationError(msg.str());
      }
    }
  }

  const int k = dataset.arm.minCoeff() < 1 ? 0 : dataset.arm.maxCoeff();
  if (k < 1) {
    throw ValidationError("arm labels must be integers in 1..k");
  }
  std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    ++counts[static_cast<size_t>(dataset.arm[i] - 1)];
  }
  for (int t = 1; t <= k; ++t) {
    const Eigen::Index c = counts[static_cast<size_t>(t - 1)];
    if (c < 2) {
      std::ostringstream msg;
      msg << "arm " << t << " has " << c << " subject" << (c == 1 ? "" : "s")
          << "; every arm label in 1.." << k << " needs at least 2";
      throw ValidationError(msg.str());
    }
  }

  if (dataset.pi.has_value()) {
    const Eigen::VectorXd& pi = *dataset.pi;
    if (pi.size() != k) {
      std::ostringstream msg;
      msg << "allocation proportions: expected " << k << " entries, got " << pi.size();
      throw ValidationError(msg.str());
    }
    for (Eigen::Index t = 0; t < pi.size(); ++t) {
      if (!(pi[t] > 0.0 && pi[t] < 1.0)) {
        std::ostringstream msg;
        msg << "allocation proportion for arm " << t + 1 << " is " << pi[t]
            << "; must lie in (0,1)";
        throw ValidationError(msg.str());
      }
    }
    const double total = pi.sum();
    if (std::abs(total - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "allocation proportions sum to " << total;
      throw ValidationError(msg.str());
    }
  }

  for (Eigen::Index j = 0; j < J; ++j) {
    if (dataset.r.col(j).sum() < 1.0) {
      std::ostringstream msg;
      msg << "covariate " << j + 1 << " fully missing";
      throw ValidationError(msg.str());
    }
  }

  // Masked entries carry no meaning; store them as zero so the zero-imputed
  // matrix is the stored matrix itself.
  dataset.x = dataset.x.cwiseProduct(dataset.r);
  return dataset;
}

ReducedIndicators reduce_indicators(const Eigen::MatrixXd& r) {
  ReducedIndicators out;
  const Eigen::Index n = r.rows();
  const Eigen::Index J = r.cols();
  for (Eigen::Index j = 0; j < J; ++j) {
    bool constant = true;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (r(i, j) != r(0, j)) {
        constant = false;
        break;
      }
    }
    if (constant) {
      out.dropped.emplace_back(j, ReducedIndicators::kConstant);
      continue;
    }
    Eigen::Index duplicate_of = -1;
    for (const Eigen::Index kept : out.columns) {
      if (r.col(j) == r.col(kept)) {
        duplicate_of = kept;
        break;
      }
    }
    if (duplicate_of >= 0) {
      out.dropped.emplace_back(j, duplicate_of);
    } else {
      out.columns.push_back(j);
    }
  }
  return out;
}

Eigen::VectorXd empirical_pi(const TrialDataset& dataset) {
  const int k = dataset.n_arms();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < dataset.arm.size(); ++i) {
    out[dataset.arm[i] - 1] += 1.0;
  }
  return out / static_cast<double>(dataset.n());
}

Eigen::VectorXd allocation(const TrialDataset& dataset) {
  return dataset.pi.has_value() ? *dataset.pi : empirical_pi(dataset);
}

std::vector<Eigen::Index> arm_rows(const TrialDataset& dataset, int t) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < dataset.arm.size(); ++i) {
    if (dataset.arm[i] == t) {
      rows.push_back(i);
    }
  }
  return rows;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  }
  return out;
}

}  // namespace rctmiss
