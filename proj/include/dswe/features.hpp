#ifndef DSWE_FEATURES_HPP
#define DSWE_FEATURES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dswe/corpus.hpp"
#include "dswe/embeddings.hpp"

namespace dswe {

enum class OovPolicy { Skip, Zero };

struct FeatureVector {
  enum class Kind { Dense, Sparse };
  Kind kind = Kind::Dense;
  std::size_t dim = 0;
  std::vector<double> values;                        // dense
  std::vector<std::pair<std::size_t, double>> entries;  // sparse, sorted

  double at(std::size_t i) const;
  std::vector<double> densified() const;
};

struct CorpusStats {
  std::size_t n_docs = 0;
  std::map<std::string, std::size_t> doc_freq;     // docs containing word
  std::map<std::string, std::size_t> vocab_index;  // word -> column
};

struct TopicModel {
  std::size_t K = 0;
  std::vector<std::string> vocab;
  std::vector<double> word_topic;  // row-major, vocab x K; rows sum to 1
  std::size_t iterations = 0;
  std::uint64_t seed = 0;

  std::ptrdiff_t find(const std::string& w) const;
  std::span<const double> row(std::size_t i) const {
    return {word_topic.data() + i * K, K};
  }
};

// x = (1/M) sum of word vectors. Under Skip, M counts in-vocabulary
// tokens only; all-OOV or empty documents map to the zero vector.
FeatureVector mean_embedding(const TokenizedDocument& doc,
                             const EmbeddingTable& table,
                             OovPolicy policy = OovPolicy::Skip);

CorpusStats fit_corpus_stats(const std::vector<TokenizedDocument>& corpus);

// tf(w) = count/doc length, idf = ln(N/df). Words with df == N weigh 0
// and are dropped, as are words unseen in the stats.
FeatureVector tfidf_vector(const TokenizedDocument& doc,
                           const CorpusStats& stats);

// Collapsed Gibbs sampling; word_topic rows are (count(w,k)+beta)
// normalized over k after the final sweep.
TopicModel fit_lda(const std::vector<TokenizedDocument>& corpus, std::size_t K,
                   std::size_t iterations, double alpha, double beta,
                   std::uint64_t seed);

// Mean of word_topic rows over in-vocabulary tokens; empty or all-OOV
// documents map to the uniform mixture 1/K.
FeatureVector topic_feature(const TokenizedDocument& doc,
                            const TopicModel& model);

void save_topic_model(const TopicModel& model, const std::string& path);
TopicModel load_topic_model(const std::string& path);

void save_corpus_stats(const CorpusStats& stats, const std::string& path);
CorpusStats load_corpus_stats(const std::string& path);

}  // namespace dswe

#endif  // DSWE_FEATURES_HPP
