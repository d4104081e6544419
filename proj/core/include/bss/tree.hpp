#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bss/rng.hpp"

namespace bss {

struct tree_config {
  int min_leaf_size{5};
  int max_depth{20};
};

/// Flattened CART node. A leaf has feature == -1. Samples with
/// x[feature] <= threshold go left.
struct tree_node {
  int feature{-1};
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double value{0.0};
  int count{0};

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(tree_node const&, tree_node const&) = default;
};

/// Chooses the candidate features examined at each split. With no rng or
/// mtry >= p every feature is examined.
struct feature_sampler {
  int mtry{0};
  bss::rng* rng{nullptr};

  void sample(int n_features, std::vector<int>& out) const;
};

class regression_tree {
public:
  regression_tree() = default;
  regression_tree(std::vector<tree_node> nodes, int n_features);

  double predict_row(Eigen::Ref<Eigen::RowVectorXd const> const& row) const;
  Eigen::VectorXd predict(Eigen::MatrixXd const& x) const;
  /// Index of the leaf reached by `row`.
  int leaf_of(Eigen::Ref<Eigen::RowVectorXd const> const& row) const;

  std::vector<tree_node> const& nodes() const { return nodes_; }
  int n_features() const { return n_features_; }
  int depth() const;

  friend bool operator==(regression_tree const&,
                         regression_tree const&) = default;

private:
  std::vector<tree_node> nodes_;
  int n_features_{0};
};

/// Grows a variance-reduction tree on all rows.
regression_tree fit_tree(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                         tree_config const& config,
                         feature_sampler const& sampler = {});

/// Grows a tree on the given row indices; repeated indices count repeatedly.
regression_tree fit_tree(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                         std::span<std::size_t const> rows,
                         tree_config const& config,
                         feature_sampler const& sampler = {});

/// Throws validation_error unless x and y are non-empty, agree in length and
/// hold only finite values.
void check_training_data(Eigen::MatrixXd const& x, Eigen::VectorXd const& y);

}  // namespace bss
