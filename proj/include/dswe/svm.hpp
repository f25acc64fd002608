#ifndef DSWE_SVM_HPP
#define DSWE_SVM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dswe/models.hpp"

namespace dswe {

struct SvmHyper {
  double lambda = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
};

// Linear SVM trained on the primal L2-regularized hinge loss by
// stochastic subgradient descent with step 1/(lambda*t). The margin is
// signed toward classes[1].
struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::string> classes;
  SvmHyper hyper;
};

SvmModel train_svm(const std::vector<FeatureVector>& features,
                   const std::vector<std::string>& labels,
                   const SvmHyper& hyper);

double svm_margin(const SvmModel& model, const FeatureVector& x);
Prediction svm_predict(const SvmModel& model, const FeatureVector& x);

// lambda/2 ||w||^2 + mean hinge loss; the quantity the trainer minimizes.
double svm_objective(const std::vector<double>& weights, double bias,
                     double lambda, const std::vector<FeatureVector>& features,
                     const std::vector<int>& y);

}  // namespace dswe

#endif  // DSWE_SVM_HPP
