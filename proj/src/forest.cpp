#include "ivmkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ivmkit/parallel.hpp"

namespace ivmkit {

namespace {

constexpr double kGainEps = 1e-12;

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double child_impurity = 0.0;  // weighted by sample counts
};

double gini_mass(long n0, long n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n <= 0.0) return 0.0;
  const double a = static_cast<double>(n0);
  const double b = static_cast<double>(n1);
  return n - (a * a + b * b) / n;
}

// Best Gini split over `mtry` sampled features; ties keep the first candidate
// in sample order, then the lowest threshold.
SplitChoice best_split(const Dataset& data, const std::vector<int>& samples,
                       long n0, long n1, int mtry, Rng& rng) {
  SplitChoice best;
  const double parent = gini_mass(n0, n1);
  const std::vector<int> features =
      rng.sample_without_replacement(data.dim(), mtry);

  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(samples.size());
  for (int feature : features) {
    sorted.clear();
    for (int i : samples) sorted.emplace_back(data.X(i, feature), data.y[i]);
    std::sort(sorted.begin(), sorted.end());

    long left0 = 0, left1 = 0;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      (sorted[k].second == 1 ? left1 : left0)++;
      if (sorted[k].first == sorted[k + 1].first) continue;
      const double impurity =
          gini_mass(left0, left1) + gini_mass(n0 - left0, n1 - left1);
      if (impurity < parent - kGainEps &&
          (!best.found || impurity < best.child_impurity)) {
        best.found = true;
        best.feature = feature;
        best.threshold = 0.5 * (sorted[k].first + sorted[k + 1].first);
        best.child_impurity = impurity;
      }
    }
  }
  return best;
}

Tree grow_tree(const Dataset& data, const std::vector<int>& in_bag,
               const ForestConfig& config, Rng rng) {
  Tree tree;
  struct Work {
    int node;
    std::vector<int> samples;
  };
  std::vector<Work> stack;

  tree.nodes.emplace_back();
  stack.push_back({0, in_bag});

  while (!stack.empty()) {
    Work work = std::move(stack.back());
    stack.pop_back();

    long n0 = 0, n1 = 0;
    for (int i : work.samples) (data.y[i] == 1 ? n1 : n0)++;
    TreeNode& node = tree.nodes[static_cast<std::size_t>(work.node)];
    node.count0 = static_cast<int>(n0);
    node.count1 = static_cast<int>(n1);

    const bool pure = n0 == 0 || n1 == 0;
    const bool too_small =
        static_cast<int>(work.samples.size()) < config.min_node;
    SplitChoice split;
    if (!pure && !too_small) {
      split = best_split(data, work.samples, n0, n1, config.mtry, rng);
    }
    if (!split.found) continue;  // stays a leaf

    std::vector<int> left, right;
    for (int i : work.samples) {
      (data.X(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[static_cast<std::size_t>(work.node)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left_id;
    parent.right = right_id;

    stack.push_back({right_id, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return tree;
}

int tree_vote(const Tree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(node)];
  return leaf.count1 > leaf.count0 ? 1 : 0;  // ties vote 0
}

}  // namespace

void ForestConfig::validate(int dim) const {
  if (ntree < 1) throw InvalidInputError("ntree must be >= 1");
  if (mtry < 1 || mtry > dim) {
    throw InvalidInputError("mtry must lie in [1, " + std::to_string(dim) + "], got " +
                            std::to_string(mtry));
  }
  if (min_node < 1) throw InvalidInputError("min_node must be >= 1");
}

int Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return tree_vote(*this, x);
}

int Tree::depth() const {
  // Nodes reference only later nodes, so a reverse pass gives depths.
  std::vector<int> height(nodes.size(), 0);
  for (std::size_t k = nodes.size(); k-- > 0;) {
    if (nodes[k].feature >= 0) {
      height[k] = 1 + std::max(height[static_cast<std::size_t>(nodes[k].left)],
                               height[static_cast<std::size_t>(nodes[k].right)]);
    }
  }
  return height.empty() ? 0 : height[0];
}

int Forest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  long votes1 = 0;
  for (const Tree& tree : trees) votes1 += tree_vote(tree, x);
  return 2 * votes1 > static_cast<long>(trees.size()) ? 1 : 0;
}

Forest fit_forest(const Dataset& data, const ForestConfig& config) {
  data.validate();
  config.validate(data.dim());
  if (data.n() < 2) throw InvalidInputError("forest requires at least two rows");
  if (!data.has_both_classes()) {
    throw InvalidInputError("forest requires both label values");
  }

  Forest forest;
  forest.config = config;
  forest.num_features = data.dim();
  forest.trees.resize(static_cast<std::size_t>(config.ntree));
  forest.oob_indices.resize(static_cast<std::size_t>(config.ntree));

  const Rng root(config.seed);
  const int n = data.n();
  parallel_for(
      static_cast<std::size_t>(config.ntree),
      [&](std::size_t t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        std::vector<int> in_bag(static_cast<std::size_t>(n));
        std::vector<char> drawn(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
          const int pick =
              static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
          in_bag[static_cast<std::size_t>(i)] = pick;
          drawn[static_cast<std::size_t>(pick)] = 1;
        }
        for (int i = 0; i < n; ++i) {
          if (!drawn[static_cast<std::size_t>(i)]) {
            forest.oob_indices[t].push_back(i);
          }
        }
        forest.trees[t] = grow_tree(data, in_bag, config, rng);
      },
      static_cast<unsigned>(config.threads < 0 ? 0 : config.threads));
  return forest;
}

OobReport oob_error(const Forest& forest, const Dataset& data) {
  data.validate();
  OobReport report;
  report.per_tree_error.resize(forest.trees.size(),
                               std::numeric_limits<double>::quiet_NaN());

  std::vector<long> votes1(static_cast<std::size_t>(data.n()), 0);
  std::vector<long> votes_total(static_cast<std::size_t>(data.n()), 0);

  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const std::vector<int>& oob = forest.oob_indices[t];
    if (oob.empty()) {
      ++report.empty_oob_trees;
      continue;
    }
    long wrong = 0;
    for (int i : oob) {
      const int vote = forest.trees[t].predict(data.X.row(i));
      if (vote != data.y[i]) ++wrong;
      votes1[static_cast<std::size_t>(i)] += vote;
      votes_total[static_cast<std::size_t>(i)]++;
    }
    report.per_tree_error[t] =
        static_cast<double>(wrong) / static_cast<double>(oob.size());
  }

  long covered = 0, wrong = 0;
  for (int i = 0; i < data.n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (votes_total[k] == 0) {
      ++report.uncovered_points;
      continue;
    }
    ++covered;
    const int vote = 2 * votes1[k] > votes_total[k] ? 1 : 0;
    if (vote != data.y[i]) ++wrong;
  }
  report.ensemble_error =
      covered > 0 ? static_cast<double>(wrong) / static_cast<double>(covered) : 0.0;
  return report;
}

Rng importance_rng(std::uint64_t seed, int tree, int feature) {
  return Rng(seed).split(static_cast<std::uint64_t>(tree))
      .split(static_cast<std::uint64_t>(feature));
}

ImportanceResult permutation_importance(const Forest& forest, const Dataset& data,
                                        std::uint64_t seed) {
  data.validate();
  if (data.dim() != forest.num_features) {
    throw DimensionError("dataset dimension differs from the fitted forest",
                         forest.num_features, data.dim());
  }
  const int d = data.dim();
  const std::size_t ntree = forest.trees.size();

  // Per-tree contributions, reduced afterwards in index order.
  std::vector<Eigen::VectorXd> contrib(ntree, Eigen::VectorXd::Zero(d));

  parallel_for(
      ntree,
      [&](std::size_t t) {
        const std::vector<int>& oob = forest.oob_indices[t];
        if (oob.size() < 2) return;  // permutation is a no-op
        const Tree& tree = forest.trees[t];

        long base_wrong = 0;
        for (int i : oob) {
          if (tree.predict(data.X.row(i)) != data.y[i]) ++base_wrong;
        }
        const double base_err =
            static_cast<double>(base_wrong) / static_cast<double>(oob.size());

        Eigen::RowVectorXd row(d);
        std::vector<double> values(oob.size());
        for (int j = 0; j < d; ++j) {
          for (std::size_t k = 0; k < oob.size(); ++k) {
            values[k] = data.X(oob[k], j);
          }
          Rng rng = importance_rng(seed, static_cast<int>(t), j);
          rng.shuffle(values);
          long wrong = 0;
          for (std::size_t k = 0; k < oob.size(); ++k) {
            row = data.X.row(oob[k]);
            row[j] = values[k];
            if (tree.predict(row) != data.y[oob[k]]) ++wrong;
          }
          const double err =
              static_cast<double>(wrong) / static_cast<double>(oob.size());
          contrib[t][j] = err - base_err;
        }
      },
      static_cast<unsigned>(forest.config.threads < 0 ? 0 : forest.config.threads));

  ImportanceResult result;
  result.vi = Eigen::VectorXd::Zero(d);
  for (std::size_t t = 0; t < ntree; ++t) result.vi += contrib[t];
  result.vi /= static_cast<double>(ntree);

  result.vi_percent = Eigen::VectorXd::Zero(d);
  const double top = result.vi.maxCoeff();
  if (top > 0.0) result.vi_percent = result.vi * (100.0 / top);
  return result;
}

Eigen::MatrixXd pearson_correlation(const Eigen::MatrixXd& X) {
  const long n = X.rows();
  const long d = X.cols();
  const Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - mean;
  Eigen::VectorXd norm(d);
  for (long j = 0; j < d; ++j) norm[j] = centered.col(j).norm();
  Eigen::MatrixXd corr(d, d);
  for (long a = 0; a < d; ++a) {
    corr(a, a) = 1.0;
    for (long b = a + 1; b < d; ++b) {
      double c = 0.0;
      if (norm[a] > 0.0 && norm[b] > 0.0 && n > 1) {
        c = centered.col(a).dot(centered.col(b)) / (norm[a] * norm[b]);
      }
      corr(a, b) = c;
      corr(b, a) = c;
    }
  }
  return corr;
}

std::vector<int> select_features(const Eigen::VectorXd& importance,
                                 const Eigen::MatrixXd& correlations, int k,
                                 double corr_threshold, bool* shortfall) {
  const int d = static_cast<int>(importance.size());
  if (k < 1 || k > d) {
    throw InvalidInputError("k must lie in [1, " + std::to_string(d) + "]");
  }
  if (correlations.rows() != d || correlations.cols() != d) {
    throw DimensionError("correlation matrix must be d x d", d, correlations.rows());
  }

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance[a] > importance[b];
  });

  std::vector<int> selected;
  for (int candidate : order) {
    if (static_cast<int>(selected.size()) == k) break;
    bool collinear = false;
    for (int s : selected) {
      if (std::abs(correlations(candidate, s)) > corr_threshold) {
        collinear = true;
        break;
      }
    }
    if (!collinear) selected.push_back(candidate);
  }
  if (shortfall != nullptr) {
    *shortfall = static_cast<int>(selected.size()) < k;
  }
  return selected;
}

}  // namespace ivmkit
