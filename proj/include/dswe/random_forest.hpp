#ifndef DSWE_RANDOM_FOREST_HPP
#define DSWE_RANDOM_FOREST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dswe/models.hpp"

namespace dswe {

struct RfHyper {
  std::size_t n_trees = 50;
  std::size_t max_depth = 16;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = floor(sqrt(dim)), capped at dim
  bool bootstrap = true;
  std::uint64_t seed = 1;
};

struct TreeNode {
  // internal node when left >= 0, leaf otherwise
  int left = -1;
  int right = -1;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::vector<std::size_t> counts;  // leaf class counts
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct RfModel {
  std::vector<DecisionTree> trees;
  std::vector<std::string> classes;
  std::size_t dim = 0;
  RfHyper hyper;
};

struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted Gini of the two children
};

// Best axis-aligned split over the given feature subset by Gini gain;
// ties go to the lowest feature index, then the lowest threshold.
SplitCandidate find_best_split(const std::vector<std::vector<double>>& rows,
                               const std::vector<std::size_t>& labels,
                               const std::vector<std::size_t>& sample,
                               const std::vector<std::size_t>& feature_subset,
                               std::size_t n_classes, std::size_t min_leaf);

RfModel train_rf(const std::vector<FeatureVector>& features,
                 const std::vector<std::string>& labels, const RfHyper& hyper);

Prediction rf_predict(const RfModel& model, const FeatureVector& x);

}  // namespace dswe

#endif  // DSWE_RANDOM_FOREST_HPP
