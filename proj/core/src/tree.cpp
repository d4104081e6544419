#include "bss/tree.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "bss/error.hpp"

namespace bss {

void feature_sampler::sample(int n_features, std::vector<int>& out) const {
  out.resize(static_cast<std::size_t>(n_features));
  std::iota(out.begin(), out.end(), 0);
  if (rng == nullptr || mtry <= 0 || mtry >= n_features) {
    return;
  }
  // partial Fisher-Yates, then id order so ties resolve the same way as a
  // full scan
  for (int i = 0; i < mtry; ++i) {
    auto const j = i + static_cast<int>(rng->index(
                           static_cast<std::uint64_t>(n_features - i)));
    std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(j)]);
  }
  out.resize(static_cast<std::size_t>(mtry));
  std::sort(out.begin(), out.end());
}

regression_tree::regression_tree(std::vector<tree_node> nodes, int n_features)
    : nodes_{std::move(nodes)}, n_features_{n_features} {}

int regression_tree::leaf_of(
    Eigen::Ref<Eigen::RowVectorXd const> const& row) const {
  int n = 0;
  while (!nodes_[static_cast<std::size_t>(n)].is_leaf()) {
    auto const& node = nodes_[static_cast<std::size_t>(n)];
    n = row(node.feature) <= node.threshold ? node.left : node.right;
  }
  return n;
}

double regression_tree::predict_row(
    Eigen::Ref<Eigen::RowVectorXd const> const& row) const {
  return nodes_[static_cast<std::size_t>(leaf_of(row))].value;
}

Eigen::VectorXd regression_tree::predict(Eigen::MatrixXd const& x) const {
  if (x.cols() != n_features_) {
    throw validation_error{fmt::format(
        "tree expects {} features, got {}", n_features_, x.cols())};
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out(r) = predict_row(x.row(r));
  }
  return out;
}

int regression_tree::depth() const {
  if (nodes_.empty()) {
    return 0;
  }
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  // children always follow their parent in the array
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    best = std::max(best, d[n]);
    if (!nodes_[n].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[n].left)] = d[n] + 1;
      d[static_cast<std::size_t>(nodes_[n].right)] = d[n] + 1;
    }
  }
  return best;
}

void check_training_data(Eigen::MatrixXd const& x, Eigen::VectorXd const& y) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw validation_error{"training data is empty"};
  }
  if (x.rows() != y.size()) {
    throw validation_error{fmt::format(
        "design matrix has {} rows but response has {}", x.rows(), y.size())};
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw validation_error{"training data contains non-finite values"};
  }
}

namespace {

struct split_choice {
  int feature{-1};
  double threshold{0.0};
  double gain{0.0};
};

class tree_builder {
public:
  tree_builder(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
               tree_config const& config, feature_sampler const& sampler)
      : x_{x}, y_{y}, config_{config}, sampler_{sampler} {}

  std::vector<tree_node> build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(nodes_);
  }

private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    auto const id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    auto const n = rows.size();

    double sum = 0.0;
    double lo = y_(static_cast<Eigen::Index>(rows.front()));
    double hi = lo;
    for (auto const r : rows) {
      auto const v = y_(static_cast<Eigen::Index>(r));
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    auto const mean = sum / static_cast<double>(n);
    nodes_[static_cast<std::size_t>(id)].value = mean;
    nodes_[static_cast<std::size_t>(id)].count = static_cast<int>(n);

    auto const min_leaf = static_cast<std::size_t>(std::max(1, config_.min_leaf_size));
    if (depth >= config_.max_depth || n < 2 * min_leaf || lo == hi) {
      return id;
    }
    auto const split = best_split(rows, mean, min_leaf);
    if (split.feature < 0) {
      return id;
    }

    auto const mid = std::stable_partition(
        rows.begin(), rows.end(), [&](std::size_t r) {
          return x_(static_cast<Eigen::Index>(r), split.feature) <=
                 split.threshold;
        });
    std::vector<std::size_t> left{rows.begin(), mid};
    std::vector<std::size_t> right{mid, rows.end()};
    rows.clear();
    rows.shrink_to_fit();

    auto const l = grow(left, depth + 1);
    auto const r = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Maximizes sum_L^2/n_L + sum_R^2/n_R over centered responses, which is
  // the reduction in summed squared error. Gains within a relative 1e-12 of
  // the best count as ties and keep the earlier feature and threshold.
  split_choice best_split(std::vector<std::size_t> const& rows, double mean,
                          std::size_t min_leaf) {
    split_choice best;
    auto const n = rows.size();
    double node_ss = 0.0;
    for (auto const r : rows) {
      auto const d = y_(static_cast<Eigen::Index>(r)) - mean;
      node_ss += d * d;
    }
    auto const tie = 1e-12 * node_ss;
    sampler_.sample(static_cast<int>(x_.cols()), features_);
    for (auto const f : features_) {
      pairs_.clear();
      for (auto const r : rows) {
        auto const ri = static_cast<Eigen::Index>(r);
        pairs_.emplace_back(x_(ri, f), y_(ri) - mean);
      }
      std::sort(pairs_.begin(), pairs_.end(),
                [](auto const& a, auto const& b) { return a.first < b.first; });
      double total = 0.0;
      for (auto const& p : pairs_) {
        total += p.second;
      }
      double left = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left += pairs_[k - 1].second;
        if (k < min_leaf || n - k < min_leaf ||
            !(pairs_[k - 1].first < pairs_[k].first)) {
          continue;
        }
        auto const right = total - left;
        auto const nl = static_cast<double>(k);
        auto const nr = static_cast<double>(n - k);
        auto const gain =
            left * left / nl + right * right / nr - total * total / static_cast<double>(n);
        if (best.feature < 0 ? gain > 0.0 : gain > best.gain + tie) {
          best.gain = gain;
          best.feature = f;
          auto thr = 0.5 * (pairs_[k - 1].first + pairs_[k].first);
          if (!(thr < pairs_[k].first)) {
            thr = pairs_[k - 1].first;
          }
          best.threshold = thr;
        }
      }
    }
    return best;
  }

  Eigen::MatrixXd const& x_;
  Eigen::VectorXd const& y_;
  tree_config config_;
  feature_sampler sampler_;
  std::vector<tree_node> nodes_;
  std::vector<int> features_;
  std::vector<std::pair<double, double>> pairs_;
};

}  // namespace

regression_tree fit_tree(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                         std::span<std::size_t const> rows,
                         tree_config const& config,
                         feature_sampler const& sampler) {
  check_training_data(x, y);
  if (rows.empty()) {
    throw validation_error{"cannot grow a tree on zero rows"};
  }
  if (config.min_leaf_size < 1 || config.max_depth < 0) {
    throw validation_error{"min_leaf_size must be >= 1 and max_depth >= 0"};
  }
  tree_builder builder{x, y, config, sampler};
  return {builder.build({rows.begin(), rows.end()}),
          static_cast<int>(x.cols())};
}

regression_tree fit_tree(Eigen::MatrixXd const& x, Eigen::VectorXd const& y,
                         tree_config const& config,
                         feature_sampler const& sampler) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(x, y, rows, config, sampler);
}

}  // namespace bss
