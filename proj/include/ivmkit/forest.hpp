#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ivmkit/dataset.hpp"
#include "ivmkit/rng.hpp"

namespace ivmkit {

struct ForestConfig {
  int ntree = 400;
  int mtry = 2;      // features tried per node
  int min_node = 1;  // nodes smaller than this become leaves
  std::uint64_t seed = 0;
  int threads = 0;

  void validate(int dim) const;
};

/// Axis-aligned binary decision tree; leaves keep class counts.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int count0 = 0;
  int count1 = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int depth() const;
};

/// Bagged classification forest grown with Gini splits; per-tree randomness
/// comes from children of the config seed, so identical seeds give identical
/// forests regardless of thread count.
struct Forest {
  ForestConfig config;
  std::vector<Tree> trees;
  std::vector<std::vector<int>> oob_indices;  // ascending, per tree
  int num_features = 0;

  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

Forest fit_forest(const Dataset& data, const ForestConfig& config);

struct OobReport {
  double ensemble_error = 0.0;
  std::vector<double> per_tree_error;  // NaN for trees with an empty OOB set
  int empty_oob_trees = 0;
  int uncovered_points = 0;  // never out-of-bag for any tree
};

OobReport oob_error(const Forest& forest, const Dataset& data);

/// The child generator used to permute feature `feature` within tree `tree`'s
/// OOB sample; exposed so the importance computation can be replayed.
Rng importance_rng(std::uint64_t seed, int tree, int feature);

struct ImportanceResult {
  Eigen::VectorXd vi;          // mean OOB error inflation per feature
  Eigen::VectorXd vi_percent;  // vi rescaled so the largest value is 100
};

/// Permutation importance: for every (tree, feature) pair, feature values are
/// permuted within the tree's OOB sample only and the error inflation is
/// averaged over all trees. Trees with fewer than two OOB points contribute
/// nothing for that feature.
ImportanceResult permutation_importance(const Forest& forest, const Dataset& data,
                                        std::uint64_t seed);

Eigen::MatrixXd pearson_correlation(const Eigen::MatrixXd& X);

/// Greedy top-k by descending importance, skipping features whose absolute
/// correlation with an already selected feature exceeds corr_threshold.
/// Sets *shortfall when fewer than k survive.
std::vector<int> select_features(const Eigen::VectorXd& importance,
                                 const Eigen::MatrixXd& correlations, int k,
                                 double corr_threshold, bool* shortfall = nullptr);

}  // namespace ivmkit
