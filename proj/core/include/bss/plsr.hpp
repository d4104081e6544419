#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bss {

struct plsr_options {
  bool autoscale{true};
  double tolerance{1e-10};  // relative change in the X-score
  int max_iterations{500};
};

/// Two-block PLS regression fitted by NIPALS.
///
/// Predictors are centered (and scaled to unit variance with autoscale);
/// constant predictor columns are dropped and remembered in `kept_columns`.
/// Responses are centered only. For component a the model stores the
/// X-weight w_a, the X-loading p_a (outer relation of X), the Y-loading q_a
/// (outer relation of Y) and the inner coefficient b_a linking the X-score
/// t_a to the Y-score u_a. The composed coefficient matrix maps the
/// preprocessed predictors straight to centered responses.
class plsr_model {
public:
  plsr_model() = default;

  int components() const { return static_cast<int>(inner.size()); }
  int input_columns() const { return n_input_columns; }

  /// (X - x_mean) / x_scale * coefficients + y_mean.
  Eigen::MatrixXd predict(Eigen::MatrixXd const& x) const;

  /// Evaluates through the score recursion t_a = E_a w_a,
  /// E_{a+1} = E_a - t_a p_a^T instead of the composed coefficients.
  Eigen::MatrixXd predict_sequential(Eigen::MatrixXd const& x) const;

  /// The model restricted to its first `a` components.
  plsr_model truncated(int a) const;

  /// Recomputes `coefficients` from W, P, Q and the inner coefficients.
  void compose();

  int n_input_columns{0};
  std::vector<int> kept_columns;
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;
  Eigen::RowVectorXd y_mean;
  Eigen::MatrixXd weights;   // kept x A
  Eigen::MatrixXd x_loadings;  // kept x A
  Eigen::MatrixXd y_loadings;  // responses x A
  Eigen::VectorXd inner;     // A
  Eigen::MatrixXd coefficients;  // kept x responses

private:
  Eigen::MatrixXd preprocess(Eigen::MatrixXd const& x) const;
};

/// Quantities recorded while fitting, used to check the model.
struct plsr_training {
  Eigen::MatrixXd x_scores;  // n x A
  Eigen::MatrixXd y_scores;  // n x A
  Eigen::MatrixXd fitted;    // n x responses
  Eigen::MatrixXd x_residual;  // preprocessed X after A deflations
  std::vector<int> iterations;
};

/// Rank of the centered (and scaled) predictor block after dropping
/// constant columns: the largest attainable component count.
int attainable_components(Eigen::MatrixXd const& x,
                          plsr_options const& options = {});

/// Throws rank_error when `components` exceeds the attainable maximum and
/// convergence_error when NIPALS stalls.
plsr_model fit_plsr(Eigen::MatrixXd const& x, Eigen::MatrixXd const& y,
                    int components, plsr_options const& options = {},
                    plsr_training* record = nullptr);

Eigen::MatrixXd predict_plsr(plsr_model const& model, Eigen::MatrixXd const& x);

struct component_selection {
  std::vector<int> candidates;
  std::vector<double> cv_error;  // mean held-out squared error per candidate
  int chosen{0};
  bool capped{false};
  std::string warning;
};

inline constexpr int kDefaultCvFolds = 5;

/// Contiguous-block cross validation over A = 1..max_components. The chosen
/// count is the smallest one whose error ties the minimum.
component_selection select_components(Eigen::MatrixXd const& x,
                                      Eigen::MatrixXd const& y, int folds,
                                      int max_components,
                                      plsr_options const& options = {});

}  // namespace bss
