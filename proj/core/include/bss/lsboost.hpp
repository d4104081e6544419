#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bss/tree.hpp"

namespace bss {

struct boost_config {
  tree_config tree{};
  int n_stages{100};
  double shrinkage{1.0};  // in (0, 1]
};

struct boost_stage {
  regression_tree tree;
  double beta{0.0};
};

/// Least-squares boosting: F(x) = F0 + sum_m shrinkage * beta_m * h_m(x).
class boost_model {
public:
  boost_model() = default;
  boost_model(double initial, std::vector<boost_stage> stages, double shrinkage,
              int n_features, tree_config tree);

  /// Uses the first `n_stages` stages (all when negative).
  Eigen::VectorXd predict(Eigen::MatrixXd const& x, int n_stages = -1) const;

  double initial() const { return initial_; }
  std::vector<boost_stage> const& stages() const { return stages_; }
  double shrinkage() const { return shrinkage_; }
  int n_features() const { return n_features_; }
  tree_config const& tree() const { return tree_; }

private:
  double initial_{0.0};
  std::vector<boost_stage> stages_;
  double shrinkage_{1.0};
  int n_features_{0};
  tree_config tree_{};
};

/// Training trace recorded while boosting: mse[0] is the error of F0 and
/// mse[m] the error after stage m.
struct boost_trace {
  std::vector<double> mse;
};

/// Each stage fits a full-feature tree to the current residual r and takes
/// beta = <r, h> / <h, h>, the minimizer of the squared training error along
/// h. Stops early once a stage can no longer move the fit.
boost_model fit_lsboost(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                        boost_config const& config,
                        boost_trace* trace = nullptr);

Eigen::VectorXd predict_boost(boost_model const& model,
                              Eigen::MatrixXd const& x);

}  // namespace bss
