#include "dswe/svm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dswe/util.hpp"

namespace dswe {

std::vector<std::string> binary_classes(const std::vector<std::string>& labels) {
  std::set<std::string> uniq(labels.begin(), labels.end());
  if (uniq.size() != 2)
    throw std::runtime_error("expected exactly 2 classes in training labels, "
                             "got " + std::to_string(uniq.size()));
  return {uniq.begin(), uniq.end()};
}

namespace {

double dot_with(const std::vector<double>& w, const FeatureVector& x) {
  if (x.dim != w.size())
    throw std::runtime_error("feature dim " + std::to_string(x.dim) +
                             " does not match model dim " +
                             std::to_string(w.size()));
  double s = 0;
  if (x.kind == FeatureVector::Kind::Dense) {
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x.values[i];
  } else {
    for (const auto& [i, v] : x.entries) s += w[i] * v;
  }
  return s;
}

}  // namespace

SvmModel train_svm(const std::vector<FeatureVector>& features,
                   const std::vector<std::string>& labels,
                   const SvmHyper& hyper) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("train_svm: features/labels size mismatch");
  const std::size_t dim = features[0].dim;
  for (const auto& f : features)
    if (f.dim != dim)
      throw std::runtime_error("train_svm: inconsistent feature dims");

  SvmModel model;
  model.classes = binary_classes(labels);
  model.hyper = hyper;
  model.weights.assign(dim, 0.0);

  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[i] = labels[i] == model.classes[1] ? +1 : -1;

  Rng rng(hyper.seed);
  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const double lambda = hyper.lambda;
  const double radius = 1.0 / std::sqrt(lambda);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const FeatureVector& x = features[idx];
      const double margin =
          static_cast<double>(y[idx]) * (dot_with(model.weights, x) + model.bias);
      const double scale = 1.0 - eta * lambda;
      for (auto& w : model.weights) w *= scale;
      if (margin < 1.0) {
        const double step = eta * static_cast<double>(y[idx]);
        if (x.kind == FeatureVector::Kind::Dense) {
          for (std::size_t i = 0; i < dim; ++i)
            model.weights[i] += step * x.values[i];
        } else {
          for (const auto& [i, v] : x.entries) model.weights[i] += step * v;
        }
        model.bias += step;
      }
      double norm = 0;
      for (double w : model.weights) norm += w * w;
      norm = std::sqrt(norm);
      if (norm > radius) {
        const double shrink = radius / norm;
        for (auto& w : model.weights) w *= shrink;
      }
    }
  }
  return model;
}

double svm_margin(const SvmModel& model, const FeatureVector& x) {
  return dot_with(model.weights, x) + model.bias;
}

Prediction svm_predict(const SvmModel& model, const FeatureVector& x) {
  const double m = svm_margin(model, x);
  Prediction p;
  p.classes = model.classes;
  p.scores = {-m, m};
  p.label = model.classes[argmax_class(p.scores)];
  return p;
}

double svm_objective(const std::vector<double>& weights, double bias,
                     double lambda, const std::vector<FeatureVector>& features,
                     const std::vector<int>& y) {
  double norm = 0;
  for (double w : weights) norm += w * w;
  double hinge = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double m = static_cast<double>(y[i]) * (dot_with(weights, features[i]) + bias);
    hinge += std::max(0.0, 1.0 - m);
  }
  return 0.5 * lambda * norm + hinge / static_cast<double>(features.size());
}

}  // namespace dswe
