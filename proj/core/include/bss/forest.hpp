#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bss/tree.hpp"

namespace bss {

struct forest_config {
  tree_config tree{};
  int n_trees{100};
  int mtry{0};  // 0: ceil(p / 3)
  bool bootstrap{true};
  std::uint64_t seed{1};
};

/// Random forest regressor. Tree t draws its bootstrap sample and split
/// features from a stream seeded by (seed, t) alone, so the model does not
/// depend on how many workers trained it.
class forest_model {
public:
  forest_model() = default;
  forest_model(std::vector<regression_tree> trees, int n_features, int mtry,
               bool bootstrap, std::uint64_t seed, tree_config tree);

  /// Mean over the first `n_trees` members (all when 0).
  Eigen::VectorXd predict(Eigen::MatrixXd const& x, int n_trees = 0) const;

  std::vector<regression_tree> const& trees() const { return trees_; }
  int n_features() const { return n_features_; }
  int mtry() const { return mtry_; }
  bool bootstrap() const { return bootstrap_; }
  std::uint64_t seed() const { return seed_; }
  tree_config const& tree() const { return tree_; }

private:
  std::vector<regression_tree> trees_;
  int n_features_{0};
  int mtry_{0};
  bool bootstrap_{true};
  std::uint64_t seed_{0};
  tree_config tree_{};
};

int resolve_forest_mtry(int configured, int n_features);

forest_model fit_forest(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                        forest_config const& config, int workers = 1);

Eigen::VectorXd predict_forest(forest_model const& model,
                               Eigen::MatrixXd const& x);

}  // namespace bss
