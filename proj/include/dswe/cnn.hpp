#ifndef DSWE_CNN_HPP
#define DSWE_CNN_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dswe/embeddings.hpp"
#include "dswe/models.hpp"

namespace dswe {

struct CnnHyper {
  std::size_t max_len = 256;  // truncation drops tokens from the end
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  bool finetune_embeddings = false;
};

// Embedding lookup -> per-width valid 1-D convolution + ReLU -> global
// max pooling -> dense -> softmax. Padding and OOV share an implicit
// zero vector outside the vocabulary.
struct CnnModel {
  std::size_t dim = 0;
  std::vector<std::size_t> widths = {2, 3, 4};
  std::size_t filters_per_width = 64;
  std::vector<std::string> classes;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> vindex;
  std::vector<double> embed;                // vocab x dim
  std::vector<std::vector<double>> conv_w;  // per width: filters x (width*dim)
  std::vector<std::vector<double>> conv_b;  // per width: filters
  std::vector<double> dense_w;              // classes x total_filters
  std::vector<double> dense_b;              // classes
  CnnHyper hyper;
  std::vector<double> epoch_loss;  // mean training CE after each epoch

  std::size_t total_filters() const { return widths.size() * filters_per_width; }
  void rebuild_index();
};

// Model with seeded random conv/dense parameters and embeddings copied
// from the table.
CnnModel cnn_init(const EmbeddingTable& table,
                  const std::vector<std::string>& classes,
                  const CnnHyper& hyper);

double cnn_loss(const CnnModel& model, const std::vector<std::string>& tokens,
                const std::string& label);

Prediction cnn_predict(const CnnModel& model,
                       const std::vector<std::string>& tokens);

// Adam on the cross-entropy, deterministic given the seed.
CnnModel train_cnn(const std::vector<std::vector<std::string>>& docs,
                   const std::vector<std::string>& labels,
                   const EmbeddingTable& table, const CnnHyper& hyper);

struct GradCheckOptions {
  double h = 1e-5;
  std::size_t max_params = 0;  // 0 = all; otherwise seeded subsample >= 200
  std::uint64_t seed = 1;
  bool corrupt_dense_bias = false;  // harness self-test fault injection
};

// Max relative error between backprop gradients and central finite
// differences over the trainable parameters.
double cnn_grad_check(const CnnModel& model,
                      const std::vector<std::string>& tokens,
                      const std::string& label,
                      const GradCheckOptions& opts = {});

}  // namespace dswe

#endif  // DSWE_CNN_HPP
