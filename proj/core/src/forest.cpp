#include "bss/forest.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bss/error.hpp"
#include "bss/parallel.hpp"
#include "bss/rng.hpp"

namespace bss {

forest_model::forest_model(std::vector<regression_tree> trees, int n_features,
                           int mtry, bool bootstrap, std::uint64_t seed,
                           tree_config tree)
    : trees_{std::move(trees)},
      n_features_{n_features},
      mtry_{mtry},
      bootstrap_{bootstrap},
      seed_{seed},
      tree_{tree} {}

Eigen::VectorXd forest_model::predict(Eigen::MatrixXd const& x,
                                      int n_trees) const {
  if (x.cols() != n_features_) {
    throw validation_error{fmt::format(
        "forest expects {} features, got {}", n_features_, x.cols())};
  }
  if (trees_.empty()) {
    throw validation_error{"forest has no trees"};
  }
  auto const used = n_trees <= 0
                        ? trees_.size()
                        : std::min(trees_.size(), static_cast<std::size_t>(n_trees));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.rows());
  for (std::size_t t = 0; t < used; ++t) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      sum(r) += trees_[t].predict_row(x.row(r));
    }
  }
  return sum / static_cast<double>(used);
}

int resolve_forest_mtry(int configured, int n_features) {
  if (configured > 0) {
    if (configured > n_features) {
      throw validation_error{fmt::format(
          "mtry={} exceeds the feature count {}", configured, n_features)};
    }
    return configured;
  }
  return std::max(1, (n_features + 2) / 3);
}

forest_model fit_forest(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                        forest_config const& config, int workers) {
  check_training_data(x, y);
  if (config.n_trees < 1) {
    throw validation_error{"a forest needs at least one tree"};
  }
  auto const p = static_cast<int>(x.cols());
  auto const mtry = resolve_forest_mtry(config.mtry, p);
  auto const n = static_cast<std::size_t>(x.rows());

  std::vector<regression_tree> trees(static_cast<std::size_t>(config.n_trees));
  auto grow = [&](std::size_t t) {
    bss::rng gen{derive_seed(config.seed, {t})};
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      for (auto& r : rows) {
        r = static_cast<std::size_t>(gen.index(n));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = i;
      }
    }
    trees[t] = fit_tree(x, y, rows, config.tree, feature_sampler{mtry, &gen});
  };

  parallel_for(trees.size(), workers, grow);
  return {std::move(trees), p, mtry, config.bootstrap, config.seed,
          config.tree};
}

Eigen::VectorXd predict_forest(forest_model const& model,
                               Eigen::MatrixXd const& x) {
  return model.predict(x);
}

}  // namespace bss
