#include "bss/plsr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bss/error.hpp"

namespace bss {

namespace {

constexpr double kRankThreshold = 1e-9;

struct preprocessed {
  std::vector<int> kept;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd x;
};

preprocessed preprocess_block(Eigen::MatrixXd const& x, bool autoscale) {
  preprocessed out;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (x.col(c).maxCoeff() != x.col(c).minCoeff()) {
      out.kept.push_back(static_cast<int>(c));
    }
  }
  auto const k = static_cast<Eigen::Index>(out.kept.size());
  out.mean.resize(k);
  out.scale.resize(k);
  out.x.resize(x.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    auto const col = x.col(out.kept[static_cast<std::size_t>(j)]);
    auto const mean = col.mean();
    out.mean(j) = mean;
    out.x.col(j) = col.array() - mean;
    double scale = 1.0;
    if (autoscale) {
      scale = std::sqrt(out.x.col(j).squaredNorm() /
                        static_cast<double>(std::max<Eigen::Index>(1, x.rows() - 1)));
    }
    out.scale(j) = scale;
    out.x.col(j) /= scale;
  }
  return out;
}

int block_rank(Eigen::MatrixXd const& xs) {
  if (xs.cols() == 0 || xs.rows() == 0) {
    return 0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(kRankThreshold);
  return static_cast<int>(qr.rank());
}

Eigen::Index max_variance_column(Eigen::MatrixXd const& m) {
  Eigen::Index best = 0;
  double best_ss = -1.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    auto const ss = m.col(c).squaredNorm();
    if (ss > best_ss) {
      best_ss = ss;
      best = c;
    }
  }
  return best;
}

void check_block(Eigen::MatrixXd const& x, Eigen::MatrixXd const& y) {
  if (x.rows() != y.rows()) {
    throw validation_error{fmt::format(
        "predictor block has {} rows but response block has {}", x.rows(),
        y.rows())};
  }
  if (x.rows() == 0 || x.cols() == 0 || y.cols() == 0) {
    throw validation_error{"PLSR blocks must be non-empty"};
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw validation_error{"PLSR blocks contain non-finite values"};
  }
}

}  // namespace

Eigen::MatrixXd plsr_model::preprocess(Eigen::MatrixXd const& x) const {
  if (x.cols() != n_input_columns) {
    throw validation_error{fmt::format(
        "PLSR model expects {} predictor columns, got {}", n_input_columns,
        x.cols())};
  }
  auto const k = static_cast<Eigen::Index>(kept_columns.size());
  Eigen::MatrixXd xs(x.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    xs.col(j) = (x.col(kept_columns[static_cast<std::size_t>(j)]).array() -
                 x_mean(j)) /
                x_scale(j);
  }
  return xs;
}

Eigen::MatrixXd plsr_model::predict(Eigen::MatrixXd const& x) const {
  Eigen::MatrixXd out = preprocess(x) * coefficients;
  out.rowwise() += y_mean;
  return out;
}

Eigen::MatrixXd plsr_model::predict_sequential(Eigen::MatrixXd const& x) const {
  Eigen::MatrixXd e = preprocess(x);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), y_mean.size());
  for (Eigen::Index a = 0; a < inner.size(); ++a) {
    Eigen::VectorXd const t = e * weights.col(a);
    e -= t * x_loadings.col(a).transpose();
    out += inner(a) * t * y_loadings.col(a).transpose();
  }
  out.rowwise() += y_mean;
  return out;
}

void plsr_model::compose() {
  auto const k = static_cast<Eigen::Index>(kept_columns.size());
  if (inner.size() == 0) {
    coefficients = Eigen::MatrixXd::Zero(k, y_mean.size());
    return;
  }
  // P^T W is upper triangular with unit diagonal for NIPALS weights, and the
  // triangular solve mirrors the score recursion exactly.
  Eigen::MatrixXd const pw = x_loadings.transpose() * weights;
  Eigen::MatrixXd const bq = inner.asDiagonal() * y_loadings.transpose();
  coefficients = weights * pw.triangularView<Eigen::Upper>().solve(bq);
}

plsr_model plsr_model::truncated(int a) const {
  if (a < 0 || a > components()) {
    throw validation_error{fmt::format(
        "cannot truncate a {}-component model to {}", components(), a)};
  }
  plsr_model m = *this;
  m.weights = weights.leftCols(a);
  m.x_loadings = x_loadings.leftCols(a);
  m.y_loadings = y_loadings.leftCols(a);
  m.inner = inner.head(a);
  m.compose();
  return m;
}

int attainable_components(Eigen::MatrixXd const& x,
                          plsr_options const& options) {
  return block_rank(preprocess_block(x, options.autoscale).x);
}

plsr_model fit_plsr(Eigen::MatrixXd const& x, Eigen::MatrixXd const& y,
                    int components, plsr_options const& options,
                    plsr_training* record) {
  check_block(x, y);
  if (components < 0) {
    throw validation_error{"component count must be non-negative"};
  }
  if (x.rows() <= components) {
    throw validation_error{fmt::format(
        "PLSR with {} components needs more than {} rows", components,
        x.rows())};
  }
  auto pre = preprocess_block(x, options.autoscale);
  auto const rank = block_rank(pre.x);
  if (components > rank) {
    throw rank_error{components, rank};
  }

  plsr_model m;
  m.n_input_columns = static_cast<int>(x.cols());
  m.kept_columns = pre.kept;
  m.x_mean = pre.mean;
  m.x_scale = pre.scale;
  m.y_mean = y.colwise().mean();

  auto const n = x.rows();
  auto const k = pre.x.cols();
  auto const ny = y.cols();
  m.weights.resize(k, components);
  m.x_loadings.resize(k, components);
  m.y_loadings.resize(ny, components);
  m.inner.resize(components);

  Eigen::MatrixXd e = std::move(pre.x);
  Eigen::MatrixXd f = y.rowwise() - m.y_mean;
  auto const y_norm = f.norm();
  Eigen::MatrixXd t_all(n, components);
  Eigen::MatrixXd u_all(n, components);
  std::vector<int> iterations;

  for (int a = 0; a < components; ++a) {
    // With the response block exhausted the component follows the dominant
    // direction of the remaining predictors and carries no response weight.
    bool const y_exhausted = !(f.norm() > 1e-12 * y_norm);
    Eigen::VectorXd u = y_exhausted ? Eigen::VectorXd(e.col(max_variance_column(e)))
                                    : Eigen::VectorXd(f.col(max_variance_column(f)));
    Eigen::VectorXd w;
    Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(ny);
    bool converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      w = e.transpose() * u;
      auto const wn = w.norm();
      if (!(wn > 0.0)) {
        throw convergence_error{a + 1};
      }
      w /= wn;
      Eigen::VectorXd const t_new = e * w;
      if (y_exhausted) {
        u = t_new;
      } else {
        q = f.transpose() * t_new;
        auto const qn = q.norm();
        if (!(qn > 0.0)) {
          throw convergence_error{a + 1};
        }
        q /= qn;
        u = f * q;
      }
      auto const change = (t_new - t).norm();
      auto const scale = t_new.norm();
      t = t_new;
      if (it > 0 && change <= options.tolerance * scale) {
        converged = true;
        break;
      }
      // one-column responses reach the fixed point in one step
      if (!y_exhausted && ny == 1 && it == 0) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw convergence_error{a + 1};
    }
    iterations.push_back(it + 1);

    auto const tt = t.squaredNorm();
    Eigen::VectorXd const p = e.transpose() * t / tt;
    double const b = y_exhausted ? 0.0 : u.dot(t) / tt;
    e -= t * p.transpose();
    f -= b * t * q.transpose();

    m.weights.col(a) = w;
    m.x_loadings.col(a) = p;
    m.y_loadings.col(a) = q;
    m.inner(a) = b;
    t_all.col(a) = t;
    u_all.col(a) = u;
  }
  m.compose();

  if (record != nullptr) {
    record->x_scores = std::move(t_all);
    record->y_scores = std::move(u_all);
    record->fitted = m.predict(x);
    record->x_residual = std::move(e);
    record->iterations = std::move(iterations);
  }
  return m;
}

Eigen::MatrixXd predict_plsr(plsr_model const& model, Eigen::MatrixXd const& x) {
  return model.predict(x);
}

component_selection select_components(Eigen::MatrixXd const& x,
                                      Eigen::MatrixXd const& y, int folds,
                                      int max_components,
                                      plsr_options const& options) {
  check_block(x, y);
  if (folds < 2) {
    throw validation_error{"cross validation needs at least two folds"};
  }
  if (max_components < 1) {
    throw validation_error{"max_components must be at least 1"};
  }
  auto const n = x.rows();
  if (n < 2 * static_cast<Eigen::Index>(folds)) {
    throw validation_error{fmt::format(
        "{} rows are too few for {}-fold cross validation", n, folds)};
  }

  component_selection sel;
  auto const attainable = attainable_components(x, options);
  auto max_a = max_components;
  if (max_a > attainable) {
    sel.capped = true;
    sel.warning = fmt::format(
        "max components {} capped at the attainable rank {}", max_a, attainable);
    max_a = std::max(1, attainable);
  }
  for (int a = 1; a <= max_a; ++a) {
    sel.candidates.push_back(a);
  }
  std::vector<double> sse(static_cast<std::size_t>(max_a), 0.0);

  for (int fold = 0; fold < folds; ++fold) {
    auto const lo = n * fold / folds;
    auto const hi = n * (fold + 1) / folds;
    Eigen::MatrixXd x_train(n - (hi - lo), x.cols());
    Eigen::MatrixXd y_train(n - (hi - lo), y.cols());
    x_train << x.topRows(lo), x.bottomRows(n - hi);
    y_train << y.topRows(lo), y.bottomRows(n - hi);
    auto const x_test = x.middleRows(lo, hi - lo);
    auto const y_test = y.middleRows(lo, hi - lo);

    auto const fold_max = std::min<int>(
        {max_a, attainable_components(x_train, options),
         static_cast<int>(x_train.rows()) - 1});
    plsr_model const full = fit_plsr(x_train, y_train, std::max(0, fold_max), options);
    for (int a = 1; a <= max_a; ++a) {
      auto const model = full.truncated(std::min(a, full.components()));
      sse[static_cast<std::size_t>(a - 1)] +=
          (model.predict(x_test) - y_test).squaredNorm();
    }
  }

  auto const cells = static_cast<double>(n * y.cols());
  for (auto const s : sse) {
    sel.cv_error.push_back(s / cells);
  }
  auto const best = *std::min_element(sel.cv_error.begin(), sel.cv_error.end());
  auto const y_var = (y.rowwise() - y.colwise().mean()).squaredNorm() / cells;
  auto const tie = 1e-9 * (best + y_var);
  for (std::size_t i = 0; i < sel.cv_error.size(); ++i) {
    if (sel.cv_error[i] <= best + tie) {
      sel.chosen = sel.candidates[i];
      break;
    }
  }
  return sel;
}

}  // namespace bss
