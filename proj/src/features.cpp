#include "dswe/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dswe/util.hpp"

namespace dswe {

double FeatureVector::at(std::size_t i) const {
  if (i >= dim) throw std::out_of_range("FeatureVector::at");
  if (kind == Kind::Dense) return values[i];
  auto it = std::lower_bound(entries.begin(), entries.end(), i,
                             [](const auto& e, std::size_t x) { return e.first < x; });
  return it != entries.end() && it->first == i ? it->second : 0.0;
}

std::vector<double> FeatureVector::densified() const {
  if (kind == Kind::Dense) return values;
  std::vector<double> out(dim, 0.0);
  for (const auto& [i, v] : entries) out[i] = v;
  return out;
}

FeatureVector mean_embedding(const TokenizedDocument& doc,
                             const EmbeddingTable& table, OovPolicy policy) {
  FeatureVector fv;
  fv.kind = FeatureVector::Kind::Dense;
  fv.dim = table.dim;
  fv.values.assign(table.dim, 0.0);
  std::size_t m = 0;
  for (const auto& w : doc.tokens) {
    auto wi = table.find(w);
    if (wi < 0) {
      if (policy == OovPolicy::Zero) ++m;
      continue;
    }
    auto v = table.vec(static_cast<std::size_t>(wi));
    for (std::size_t d = 0; d < table.dim; ++d) fv.values[d] += v[d];
    ++m;
  }
  if (m > 0)
    for (auto& x : fv.values) x /= static_cast<double>(m);
  return fv;
}

CorpusStats fit_corpus_stats(const std::vector<TokenizedDocument>& corpus) {
  if (corpus.empty())
    throw std::runtime_error("fit_corpus_stats: empty corpus");
  CorpusStats stats;
  stats.n_docs = corpus.size();
  for (const auto& doc : corpus) {
    std::vector<std::string> uniq(doc.tokens);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& w : uniq) stats.doc_freq[w]++;
  }
  std::size_t col = 0;
  for (const auto& [w, df] : stats.doc_freq) stats.vocab_index[w] = col++;
  return stats;
}

FeatureVector tfidf_vector(const TokenizedDocument& doc,
                           const CorpusStats& stats) {
  FeatureVector fv;
  fv.kind = FeatureVector::Kind::Sparse;
  fv.dim = stats.vocab_index.size();
  if (doc.tokens.empty()) return fv;
  const double len = static_cast<double>(doc.tokens.size());
  std::map<std::string, std::size_t> counts;
  for (const auto& w : doc.tokens) counts[w]++;
  for (const auto& [w, c] : counts) {
    auto df_it = stats.doc_freq.find(w);
    if (df_it == stats.doc_freq.end()) continue;  // unseen at inference
    if (df_it->second == stats.n_docs) continue;  // idf = 0
    double tf = static_cast<double>(c) / len;
    double idf = std::log(static_cast<double>(stats.n_docs) /
                          static_cast<double>(df_it->second));
    fv.entries.emplace_back(stats.vocab_index.at(w), tf * idf);
  }
  std::sort(fv.entries.begin(), fv.entries.end());
  return fv;
}

std::ptrdiff_t TopicModel::find(const std::string& w) const {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), w);
  if (it == vocab.end() || *it != w) return -1;
  return it - vocab.begin();
}

TopicModel fit_lda(const std::vector<TokenizedDocument>& corpus, std::size_t K,
                   std::size_t iterations, double alpha, double beta,
                   std::uint64_t seed) {
  if (corpus.empty()) throw std::runtime_error("fit_lda: empty corpus");
  if (K < 2) throw std::invalid_argument("fit_lda: K must be >= 2");

  std::vector<std::string> vocab;
  {
    std::vector<std::string> all;
    for (const auto& d : corpus)
      all.insert(all.end(), d.tokens.begin(), d.tokens.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    vocab = std::move(all);
  }
  const std::size_t V = vocab.size();
  if (K > V)
    throw std::runtime_error("fit_lda: K (" + std::to_string(K) +
                             ") exceeds vocabulary size (" +
                             std::to_string(V) + ")");
  std::unordered_map<std::string, std::size_t> w2i;
  for (std::size_t i = 0; i < V; ++i) w2i[vocab[i]] = i;

  const std::size_t M = corpus.size();
  std::vector<std::vector<std::size_t>> docs(M);
  std::size_t total_tokens = 0;
  for (std::size_t m = 0; m < M; ++m) {
    docs[m].reserve(corpus[m].tokens.size());
    for (const auto& w : corpus[m].tokens) docs[m].push_back(w2i[w]);
    total_tokens += docs[m].size();
  }

  std::vector<std::size_t> n_wk(V * K, 0), n_dk(M * K, 0), n_k(K, 0);
  std::vector<std::vector<std::uint16_t>> z(M);

  Rng rng(seed);
  for (std::size_t m = 0; m < M; ++m) {
    z[m].resize(docs[m].size());
    for (std::size_t i = 0; i < docs[m].size(); ++i) {
      std::size_t k = rng.below(K);
      z[m][i] = static_cast<std::uint16_t>(k);
      ++n_wk[docs[m][i] * K + k];
      ++n_dk[m * K + k];
      ++n_k[k];
    }
  }

  std::vector<double> p(K);
  const double vbeta = static_cast<double>(V) * beta;
  for (std::size_t iter = 0; iter < iterations; ++iter) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t i = 0; i < docs[m].size(); ++i) {
        const std::size_t w = docs[m][i];
        std::size_t old = z[m][i];
        --n_wk[w * K + old];
        --n_dk[m * K + old];
        --n_k[old];
        double cum = 0;
        for (std::size_t k = 0; k < K; ++k) {
          cum += (static_cast<double>(n_dk[m * K + k]) + alpha) *
                 (static_cast<double>(n_wk[w * K + k]) + beta) /
                 (static_cast<double>(n_k[k]) + vbeta);
          p[k] = cum;
        }
        double u = rng.unit() * cum;
        std::size_t pick = 0;
        while (pick + 1 < K && p[pick] < u) ++pick;
        z[m][i] = static_cast<std::uint16_t>(pick);
        ++n_wk[w * K + pick];
        ++n_dk[m * K + pick];
        ++n_k[pick];
      }
    }
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < K; ++k) assigned += n_k[k];
    if (assigned != total_tokens)
      throw std::logic_error("fit_lda: assignment count diverged from token "
                             "count after sweep " + std::to_string(iter + 1));
  }

  TopicModel model;
  model.K = K;
  model.vocab = std::move(vocab);
  model.iterations = iterations;
  model.seed = seed;
  model.word_topic.resize(V * K);
  for (std::size_t w = 0; w < V; ++w) {
    double sum = 0;
    for (std::size_t k = 0; k < K; ++k)
      sum += static_cast<double>(n_wk[w * K + k]) + beta;
    for (std::size_t k = 0; k < K; ++k)
      model.word_topic[w * K + k] =
          (static_cast<double>(n_wk[w * K + k]) + beta) / sum;
  }
  return model;
}

FeatureVector topic_feature(const TokenizedDocument& doc,
                            const TopicModel& model) {
  FeatureVector fv;
  fv.kind = FeatureVector::Kind::Dense;
  fv.dim = model.K;
  fv.values.assign(model.K, 0.0);
  std::size_t m = 0;
  for (const auto& w : doc.tokens) {
    auto wi = model.find(w);
    if (wi < 0) continue;
    auto row = model.row(static_cast<std::size_t>(wi));
    for (std::size_t k = 0; k < model.K; ++k) fv.values[k] += row[k];
    ++m;
  }
  if (m == 0) {
    fv.values.assign(model.K, 1.0 / static_cast<double>(model.K));
  } else {
    for (auto& x : fv.values) x /= static_cast<double>(m);
  }
  return fv;
}

void save_topic_model(const TopicModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write topic model: " + path);
  out << "LDA " << model.K << " " << model.vocab.size() << " " << model.seed
      << "\n";
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    out << model.vocab[w];
    for (std::size_t k = 0; k < model.K; ++k)
      out << " " << format_double(model.word_topic[w * model.K + k]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TopicModel load_topic_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topic model: " + path);
  std::string tag;
  std::size_t K = 0, V = 0;
  std::uint64_t seed = 0;
  if (!(in >> tag >> K >> V >> seed) || tag != "LDA")
    throw std::runtime_error(path + ": bad topic model header");
  TopicModel model;
  model.K = K;
  model.seed = seed;
  model.vocab.resize(V);
  model.word_topic.resize(V * K);
  for (std::size_t w = 0; w < V; ++w) {
    if (!(in >> model.vocab[w]))
      throw std::runtime_error(path + ": truncated topic model");
    for (std::size_t k = 0; k < K; ++k) {
      if (!(in >> model.word_topic[w * K + k]))
        throw std::runtime_error(path + ": truncated topic row for \"" +
                                 model.vocab[w] + "\"");
    }
  }
  return model;
}

void save_corpus_stats(const CorpusStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus stats: " + path);
  out << "STATS " << stats.n_docs << " " << stats.doc_freq.size() << "\n";
  for (const auto& [w, df] : stats.doc_freq)
    out << w << " " << df << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

CorpusStats load_corpus_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus stats: " + path);
  std::string tag;
  std::size_t n = 0, v = 0;
  if (!(in >> tag >> n >> v) || tag != "STATS")
    throw std::runtime_error(path + ": bad stats header");
  CorpusStats stats;
  stats.n_docs = n;
  for (std::size_t i = 0; i < v; ++i) {
    std::string w;
    std::size_t df;
    if (!(in >> w >> df))
      throw std::runtime_error(path + ": truncated stats file");
    stats.doc_freq[w] = df;
  }
  std::size_t col = 0;
  for (const auto& [w, df] : stats.doc_freq) stats.vocab_index[w] = col++;
  return stats;
}

}  // namespace dswe
