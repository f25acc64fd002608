#include "dswe/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dswe/util.hpp"

namespace dswe {

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

}  // namespace

SplitCandidate find_best_split(const std::vector<std::vector<double>>& rows,
                               const std::vector<std::size_t>& labels,
                               const std::vector<std::size_t>& sample,
                               const std::vector<std::size_t>& feature_subset,
                               std::size_t n_classes, std::size_t min_leaf) {
  SplitCandidate best;
  const std::size_t n = sample.size();
  if (n < 2 * min_leaf) return best;

  std::vector<std::pair<double, std::size_t>> order(n);  // value, label
  for (std::size_t f : feature_subset) {
    for (std::size_t i = 0; i < n; ++i)
      order[i] = {rows[sample[i]][f], labels[sample[i]]};
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::size_t> left_counts(n_classes, 0), right_counts(n_classes, 0);
    for (const auto& [v, l] : order) right_counts[l]++;
    std::size_t nl = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_counts[order[i].second]++;
      right_counts[order[i].second]--;
      ++nl;
      if (order[i].first == order[i + 1].first) continue;
      if (nl < min_leaf || n - nl < min_leaf) continue;
      double imp = (static_cast<double>(nl) * gini(left_counts, nl) +
                    static_cast<double>(n - nl) * gini(right_counts, n - nl)) /
                   static_cast<double>(n);
      if (!best.found || imp < best.impurity) {
        best.found = true;
        best.feature = f;
        best.threshold = order[i].first + 0.5 * (order[i + 1].first - order[i].first);
        best.impurity = imp;
      }
    }
  }
  return best;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& rows;
  const std::vector<std::size_t>& labels;
  std::size_t n_classes;
  const RfHyper& hyper;
  std::size_t n_features;
  std::size_t mtry;
  Rng& rng;
  DecisionTree tree;

  int build(std::vector<std::size_t>& sample, std::size_t depth) {
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t i : sample) counts[labels[i]]++;
    std::size_t majority = 0;
    for (std::size_t c : counts)
      if (c == sample.size()) majority = 1;

    bool stop = majority || depth >= hyper.max_depth ||
                sample.size() < 2 * hyper.min_leaf;
    SplitCandidate split;
    if (!stop) {
      std::vector<std::size_t> subset = sample_features();
      split = find_best_split(rows, labels, sample, subset, n_classes,
                              hyper.min_leaf);
      double parent = gini(counts, sample.size());
      if (!split.found || split.impurity >= parent) stop = true;
    }
    if (stop) {
      TreeNode leaf;
      leaf.counts = counts;
      tree.nodes.push_back(std::move(leaf));
      return static_cast<int>(tree.nodes.size() - 1);
    }

    std::vector<std::size_t> ls, rs;
    for (std::size_t i : sample) {
      if (rows[i][split.feature] <= split.threshold)
        ls.push_back(i);
      else
        rs.push_back(i);
    }
    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[self].feature = split.feature;
    tree.nodes[self].threshold = split.threshold;
    int l = build(ls, depth + 1);
    int r = build(rs, depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }

  std::vector<std::size_t> sample_features() {
    std::vector<std::size_t> all(n_features);
    for (std::size_t i = 0; i < n_features; ++i) all[i] = i;
    if (mtry >= n_features) return all;
    for (std::size_t i = 0; i < mtry; ++i) {
      std::size_t j = i + rng.below(n_features - i);
      std::swap(all[i], all[j]);
    }
    all.resize(mtry);
    std::sort(all.begin(), all.end());
    return all;
  }
};

}  // namespace

RfModel train_rf(const std::vector<FeatureVector>& features,
                 const std::vector<std::string>& labels, const RfHyper& hyper) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("train_rf: features/labels size mismatch");
  RfModel model;
  model.classes = binary_classes(labels);
  model.hyper = hyper;
  model.dim = features[0].dim;

  std::vector<std::vector<double>> rows;
  rows.reserve(features.size());
  for (const auto& f : features) {
    if (f.dim != model.dim)
      throw std::runtime_error("train_rf: inconsistent feature dims");
    rows.push_back(f.densified());
  }
  std::vector<std::size_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[i] = labels[i] == model.classes[1] ? 1 : 0;

  std::size_t mtry = hyper.features_per_split;
  if (mtry == 0)
    mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(model.dim))));
  mtry = std::min(mtry, model.dim);

  const std::size_t n = rows.size();
  model.trees.reserve(hyper.n_trees);
  for (std::size_t ti = 0; ti < hyper.n_trees; ++ti) {
    Rng rng(hyper.seed ^ static_cast<std::uint64_t>(ti));
    std::vector<std::size_t> sample;
    sample.reserve(n);
    if (hyper.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) sample.push_back(rng.below(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) sample.push_back(i);
    }
    TreeBuilder builder{rows, y, 2, hyper, model.dim, mtry, rng, {}};
    builder.build(sample, 0);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

Prediction rf_predict(const RfModel& model, const FeatureVector& x) {
  if (x.dim != model.dim)
    throw std::runtime_error("rf_predict: feature dim " + std::to_string(x.dim) +
                             " does not match model dim " +
                             std::to_string(model.dim));
  std::vector<double> row = x.densified();
  std::vector<std::size_t> votes(model.classes.size(), 0);
  for (const auto& tree : model.trees) {
    int node = 0;
    while (tree.nodes[node].left >= 0) {
      const TreeNode& tn = tree.nodes[node];
      node = row[tn.feature] <= tn.threshold ? tn.left : tn.right;
    }
    const auto& counts = tree.nodes[node].counts;
    std::size_t vote = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
      if (counts[c] > counts[vote]) vote = c;
    votes[vote]++;
  }
  Prediction p;
  p.classes = model.classes;
  p.scores.resize(model.classes.size());
  for (std::size_t c = 0; c < votes.size(); ++c)
    p.scores[c] = static_cast<double>(votes[c]) /
                  static_cast<double>(model.trees.size());
  p.label = model.classes[argmax_class(p.scores)];
  return p;
}

}  // namespace dswe
