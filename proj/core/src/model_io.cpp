#include "bss/model_io.hpp"

#include <charconv>
#include <string>

#include <fmt/format.h>

#include "bss/error.hpp"

namespace bss {

namespace {

constexpr int kFormatVersion = 1;

class token_reader {
public:
  explicit token_reader(std::istream& in) : in_{in} {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) {
      throw validation_error{"unexpected end of model file"};
    }
    return w;
  }

  void expect(std::string_view keyword) {
    auto const w = word();
    if (w != keyword) {
      throw validation_error{
          fmt::format("model file: expected '{}', found '{}'", keyword, w)};
    }
  }

  template <typename T>
  T number() {
    auto const w = word();
    T v{};
    auto const [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) {
      throw validation_error{fmt::format("model file: bad number '{}'", w)};
    }
    return v;
  }

  template <typename T>
  T field(std::string_view keyword) {
    expect(keyword);
    return number<T>();
  }

private:
  std::istream& in_;
};

void check_header(token_reader& r, std::string_view magic) {
  r.expect(magic);
  if (auto const v = r.number<int>(); v != kFormatVersion) {
    throw validation_error{
        fmt::format("unsupported {} format version {}", magic, v)};
  }
}

void write_tree(std::ostream& out, regression_tree const& t) {
  out << fmt::format("nodes {}\n", t.nodes().size());
  for (auto const& n : t.nodes()) {
    out << fmt::format("{} {} {} {} {} {}\n", n.feature, n.threshold, n.left,
                       n.right, n.value, n.count);
  }
}

regression_tree read_tree(token_reader& r, int n_features) {
  auto const count = r.field<std::size_t>("nodes");
  std::vector<tree_node> nodes(count);
  for (auto& n : nodes) {
    n.feature = r.number<int>();
    n.threshold = r.number<double>();
    n.left = r.number<int>();
    n.right = r.number<int>();
    n.value = r.number<double>();
    n.count = r.number<int>();
    auto const bad_child = [&](int c) {
      return c < 0 || static_cast<std::size_t>(c) >= count;
    };
    if (!n.is_leaf() &&
        (n.feature >= n_features || bad_child(n.left) || bad_child(n.right))) {
      throw validation_error{"model file: inconsistent tree node"};
    }
  }
  if (nodes.empty()) {
    throw validation_error{"model file: empty tree"};
  }
  return {std::move(nodes), n_features};
}

void write_tree_config(std::ostream& out, tree_config const& c) {
  out << fmt::format("min_leaf_size {}\nmax_depth {}\n", c.min_leaf_size,
                     c.max_depth);
}

tree_config read_tree_config(token_reader& r) {
  tree_config c;
  c.min_leaf_size = r.field<int>("min_leaf_size");
  c.max_depth = r.field<int>("max_depth");
  return c;
}

void write_matrix(std::ostream& out, std::string_view name,
                  Eigen::MatrixXd const& m) {
  out << fmt::format("{} {} {}\n", name, m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c == 0 ? "" : " ") << fmt::format("{}", m(r, c));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(token_reader& r, std::string_view name) {
  r.expect(name);
  auto const rows = r.number<Eigen::Index>();
  auto const cols = r.number<Eigen::Index>();
  if (rows < 0 || cols < 0) {
    throw validation_error{"model file: negative matrix dimension"};
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = r.number<double>();
    }
  }
  return m;
}

}  // namespace

void write_model(std::ostream& out, forest_model const& m) {
  out << fmt::format("bss-forest {}\n", kFormatVersion);
  out << fmt::format("n_features {}\nmtry {}\nbootstrap {}\nseed {}\n",
                     m.n_features(), m.mtry(), m.bootstrap() ? 1 : 0, m.seed());
  write_tree_config(out, m.tree());
  out << fmt::format("trees {}\n", m.trees().size());
  for (auto const& t : m.trees()) {
    write_tree(out, t);
  }
}

forest_model read_forest(std::istream& in) {
  token_reader r{in};
  check_header(r, "bss-forest");
  auto const p = r.field<int>("n_features");
  auto const mtry = r.field<int>("mtry");
  auto const bootstrap = r.field<int>("bootstrap") != 0;
  auto const seed = r.field<std::uint64_t>("seed");
  auto const cfg = read_tree_config(r);
  auto const count = r.field<std::size_t>("trees");
  std::vector<regression_tree> trees;
  trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    trees.push_back(read_tree(r, p));
  }
  return {std::move(trees), p, mtry, bootstrap, seed, cfg};
}

void write_model(std::ostream& out, boost_model const& m) {
  out << fmt::format("bss-lsboost {}\n", kFormatVersion);
  out << fmt::format("n_features {}\nshrinkage {}\ninitial {}\n",
                     m.n_features(), m.shrinkage(), m.initial());
  write_tree_config(out, m.tree());
  out << fmt::format("stages {}\n", m.stages().size());
  for (auto const& s : m.stages()) {
    out << fmt::format("beta {}\n", s.beta);
    write_tree(out, s.tree);
  }
}

boost_model read_boost(std::istream& in) {
  token_reader r{in};
  check_header(r, "bss-lsboost");
  auto const p = r.field<int>("n_features");
  auto const shrinkage = r.field<double>("shrinkage");
  auto const initial = r.field<double>("initial");
  auto const cfg = read_tree_config(r);
  auto const count = r.field<std::size_t>("stages");
  std::vector<boost_stage> stages;
  stages.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    auto const beta = r.field<double>("beta");
    stages.push_back({read_tree(r, p), beta});
  }
  return {initial, std::move(stages), shrinkage, p, cfg};
}

void write_model(std::ostream& out, plsr_model const& m) {
  out << fmt::format("bss-plsr {}\n", kFormatVersion);
  out << fmt::format("input_columns {}\n", m.n_input_columns);
  out << fmt::format("kept_columns {}", m.kept_columns.size());
  for (auto const c : m.kept_columns) {
    out << ' ' << c;
  }
  out << '\n';
  write_matrix(out, "x_mean", m.x_mean);
  write_matrix(out, "x_scale", m.x_scale);
  write_matrix(out, "y_mean", m.y_mean);
  write_matrix(out, "weights", m.weights);
  write_matrix(out, "x_loadings", m.x_loadings);
  write_matrix(out, "y_loadings", m.y_loadings);
  write_matrix(out, "inner", m.inner);
  write_matrix(out, "coefficients", m.coefficients);
}

plsr_model read_plsr(std::istream& in) {
  token_reader r{in};
  check_header(r, "bss-plsr");
  plsr_model m;
  m.n_input_columns = r.field<int>("input_columns");
  auto const kept = r.field<std::size_t>("kept_columns");
  for (std::size_t i = 0; i < kept; ++i) {
    m.kept_columns.push_back(r.number<int>());
  }
  m.x_mean = read_matrix(r, "x_mean");
  m.x_scale = read_matrix(r, "x_scale");
  m.y_mean = read_matrix(r, "y_mean");
  m.weights = read_matrix(r, "weights");
  m.x_loadings = read_matrix(r, "x_loadings");
  m.y_loadings = read_matrix(r, "y_loadings");
  m.inner = read_matrix(r, "inner");
  m.coefficients = read_matrix(r, "coefficients");
  auto const k = static_cast<Eigen::Index>(kept);
  auto const a = m.inner.size();
  if (m.x_mean.size() != k || m.x_scale.size() != k || m.weights.rows() != k ||
      m.weights.cols() != a || m.x_loadings.rows() != k ||
      m.x_loadings.cols() != a || m.y_loadings.cols() != a ||
      m.y_loadings.rows() != m.y_mean.size() || m.coefficients.rows() != k ||
      m.coefficients.cols() != m.y_mean.size()) {
    throw validation_error{"model file: inconsistent PLSR dimensions"};
  }
  return m;
}

}  // namespace bss
