#ifndef DSWE_EMBEDDINGS_HPP
#define DSWE_EMBEDDINGS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dswe {

struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::string> vocab;
  std::vector<double> data;  // row-major, vocab.size() x dim
  std::unordered_map<std::string, std::size_t> index;

  std::span<const double> vec(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
  // -1 when absent
  std::ptrdiff_t find(const std::string& word) const {
    auto it = index.find(word);
    return it == index.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }
  void rebuild_index();
};

struct SkipgramConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of the start
  std::size_t min_count = 1;
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 1;
};

double cosine(std::span<const double> a, std::span<const double> b);

// word2vec text format: header "<vocab> <dim>", then one word per line.
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingTable& table, const std::string& path);

// Skip-gram with negative sampling over the unigram^(3/4) table,
// single-threaded in document order so equal seeds give equal tables.
EmbeddingTable train_skipgram(
    const std::vector<std::vector<std::string>>& docs,
    const SkipgramConfig& cfg);

struct Neighbor {
  std::string word;
  double cosine;
};
// Descending cosine, query excluded, ties broken by vocab order.
std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table,
                                        const std::string& word,
                                        std::size_t k);

// Loss and gradients of one negative-sampling step:
//   L = -log s(u_ctx . v_c) - sum_n log s(-u_n . v_c)
// Gradients are written to g_center (dim), g_context (dim) and g_negs
// (negs.size() x dim, row-major). Shared by the trainer and the
// finite-difference checks.
double sgns_loss_grad(std::span<const double> v_center,
                      std::span<const double> u_context,
                      const std::vector<std::span<const double>>& u_negs,
                      std::span<double> g_center, std::span<double> g_context,
                      std::span<double> g_negs);

}  // namespace dswe

#endif  // DSWE_EMBEDDINGS_HPP
