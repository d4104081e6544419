#include "bss/lsboost.hpp"

#include <fmt/format.h>

#include "bss/error.hpp"

namespace bss {

boost_model::boost_model(double initial, std::vector<boost_stage> stages,
                         double shrinkage, int n_features, tree_config tree)
    : initial_{initial},
      stages_{std::move(stages)},
      shrinkage_{shrinkage},
      n_features_{n_features},
      tree_{tree} {}

Eigen::VectorXd boost_model::predict(Eigen::MatrixXd const& x,
                                     int n_stages) const {
  if (x.cols() != n_features_) {
    throw validation_error{fmt::format(
        "boosting model expects {} features, got {}", n_features_, x.cols())};
  }
  auto const used = n_stages < 0 ? stages_.size()
                                 : std::min(stages_.size(),
                                            static_cast<std::size_t>(n_stages));
  Eigen::VectorXd f = Eigen::VectorXd::Constant(x.rows(), initial_);
  for (std::size_t m = 0; m < used; ++m) {
    auto const step = shrinkage_ * stages_[m].beta;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      f(r) += step * stages_[m].tree.predict_row(x.row(r));
    }
  }
  return f;
}

boost_model fit_lsboost(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                        boost_config const& config, boost_trace* trace) {
  check_training_data(x, y);
  if (config.n_stages < 0) {
    throw validation_error{"n_stages must be non-negative"};
  }
  if (!(config.shrinkage > 0.0 && config.shrinkage <= 1.0)) {
    throw validation_error{"shrinkage must lie in (0, 1]"};
  }
  auto const n = static_cast<double>(y.size());
  auto const f0 = y.sum() / n;
  Eigen::VectorXd fit = Eigen::VectorXd::Constant(y.size(), f0);
  Eigen::VectorXd residual = y - fit;
  if (trace != nullptr) {
    trace->mse.assign(1, residual.squaredNorm() / n);
  }

  std::vector<boost_stage> stages;
  for (int m = 0; m < config.n_stages; ++m) {
    auto tree = fit_tree(x, residual, config.tree);
    // a single leaf predicts mean(r), which is zero in exact arithmetic
    if (tree.nodes().size() == 1) {
      break;
    }
    Eigen::VectorXd const h = tree.predict(x);
    auto const hh = h.squaredNorm();
    if (hh == 0.0) {
      break;
    }
    auto const beta = residual.dot(h) / hh;
    fit += (config.shrinkage * beta) * h;
    residual = y - fit;
    if (trace != nullptr) {
      trace->mse.push_back(residual.squaredNorm() / n);
    }
    stages.push_back({std::move(tree), beta});
  }
  return {f0, std::move(stages), config.shrinkage,
          static_cast<int>(x.cols()), config.tree};
}

Eigen::VectorXd predict_boost(boost_model const& model,
                              Eigen::MatrixXd const& x) {
  return model.predict(x);
}

}  // namespace bss
