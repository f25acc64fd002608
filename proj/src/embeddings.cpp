#include "dswe/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dswe/util.hpp"

namespace dswe {

void EmbeddingTable::rebuild_index() {
  index.clear();
  index.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = i;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty embeddings file");
  std::istringstream hdr(line);
  std::size_t n = 0, dim = 0;
  if (!(hdr >> n >> dim) || dim == 0)
    throw std::runtime_error(path + ":1: bad header, expected <vocab> <dim>");
  EmbeddingTable t;
  t.dim = dim;
  t.vocab.reserve(n);
  t.data.reserve(n * dim);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty())
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": missing word");
    if (t.index.count(word))
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": duplicate word \"" + word + "\"");
    std::size_t got = 0;
    double v;
    while (ls >> v) {
      if (!std::isfinite(v))
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ": non-finite component");
      t.data.push_back(v);
      ++got;
    }
    if (got != dim)
      throw std::runtime_error(path + ": row " + std::to_string(row) + ": " +
                               std::to_string(got) + " components, expected " +
                               std::to_string(dim));
    t.index[word] = t.vocab.size();
    t.vocab.push_back(word);
  }
  if (t.vocab.size() != n)
    throw std::runtime_error(path + ": header declares " + std::to_string(n) +
                             " words, file has " +
                             std::to_string(t.vocab.size()));
  return t;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  if (table.vocab.empty())
    throw std::runtime_error("refusing to save an empty embedding table");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embeddings file: " + path);
  out << table.vocab.size() << " " << table.dim << "\n";
  for (std::size_t i = 0; i < table.vocab.size(); ++i) {
    out << table.vocab[i];
    auto v = table.vec(i);
    for (double x : v) out << " " << format_float(static_cast<float>(x));
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

double sgns_loss_grad(std::span<const double> v_center,
                      std::span<const double> u_context,
                      const std::vector<std::span<const double>>& u_negs,
                      std::span<double> g_center, std::span<double> g_context,
                      std::span<double> g_negs) {
  const std::size_t dim = v_center.size();
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  std::fill(g_center.begin(), g_center.end(), 0.0);

  double dot = 0;
  for (std::size_t d = 0; d < dim; ++d) dot += u_context[d] * v_center[d];
  double s = sigmoid(dot);
  double loss = -std::log(std::max(s, 1e-300));
  for (std::size_t d = 0; d < dim; ++d) {
    g_context[d] = (s - 1.0) * v_center[d];
    g_center[d] += (s - 1.0) * u_context[d];
  }
  for (std::size_t k = 0; k < u_negs.size(); ++k) {
    double nd = 0;
    for (std::size_t d = 0; d < dim; ++d) nd += u_negs[k][d] * v_center[d];
    double sn = sigmoid(nd);
    loss -= std::log(std::max(1.0 - sn, 1e-300));
    for (std::size_t d = 0; d < dim; ++d) {
      g_negs[k * dim + d] = sn * v_center[d];
      g_center[d] += sn * u_negs[k][d];
    }
  }
  return loss;
}

EmbeddingTable train_skipgram(
    const std::vector<std::vector<std::string>>& docs,
    const SkipgramConfig& cfg) {
  if (cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 ||
      cfg.learning_rate <= 0)
    throw std::invalid_argument("skipgram config values must be positive");

  // vocabulary: count, filter by min_count, order by count desc then
  // first appearance
  std::unordered_map<std::string, std::size_t> counts;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::size_t seen = 0;
  for (const auto& doc : docs) {
    for (const auto& w : doc) {
      auto [it, fresh] = counts.try_emplace(w, 0);
      it->second++;
      if (fresh) first_seen[w] = seen;
      ++seen;
    }
  }
  std::vector<std::string> vocab;
  for (auto& [w, c] : counts)
    if (c >= cfg.min_count) vocab.push_back(w);
  if (vocab.empty())
    throw std::runtime_error("empty vocabulary after min_count filtering");
  std::sort(vocab.begin(), vocab.end(), [&](const auto& a, const auto& b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return first_seen[a] < first_seen[b];
  });

  EmbeddingTable t;
  t.dim = cfg.dim;
  t.vocab = vocab;
  t.rebuild_index();
  const std::size_t V = vocab.size();

  std::vector<std::size_t> word_count(V);
  std::size_t total_tokens = 0;
  for (std::size_t i = 0; i < V; ++i) {
    word_count[i] = counts[vocab[i]];
    total_tokens += word_count[i];
  }

  // unigram^(3/4) negative sampling table
  const std::size_t table_size = std::max<std::size_t>(V * 64, 1 << 16);
  std::vector<std::uint32_t> neg_table(table_size);
  double pow_sum = 0;
  for (std::size_t i = 0; i < V; ++i)
    pow_sum += std::pow(static_cast<double>(word_count[i]), 0.75);
  {
    std::size_t i = 0;
    double cum = std::pow(static_cast<double>(word_count[0]), 0.75) / pow_sum;
    for (std::size_t pos = 0; pos < table_size; ++pos) {
      neg_table[pos] = static_cast<std::uint32_t>(i);
      if (static_cast<double>(pos + 1) / table_size > cum && i + 1 < V) {
        ++i;
        cum += std::pow(static_cast<double>(word_count[i]), 0.75) / pow_sum;
      }
    }
  }

  Rng rng(cfg.seed);
  t.data.resize(V * cfg.dim);
  for (auto& x : t.data) x = (rng.unit() - 0.5) / static_cast<double>(cfg.dim);
  std::vector<double> out_vecs(V * cfg.dim, 0.0);

  std::vector<double> g_center(cfg.dim), g_context(cfg.dim),
      g_negs(cfg.negatives * cfg.dim);
  std::vector<std::span<const double>> neg_spans;
  std::vector<std::size_t> neg_idx;
  std::vector<std::size_t> kept;

  const double start_lr = cfg.learning_rate;
  const double min_lr = start_lr * 1e-4;
  const double total_work =
      static_cast<double>(total_tokens) * static_cast<double>(cfg.epochs) + 1.0;
  std::size_t processed = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& doc : docs) {
      kept.clear();
      for (const auto& w : doc) {
        auto wi = t.find(w);
        if (wi < 0) continue;
        ++processed;
        if (cfg.subsample_threshold > 0) {
          double f = static_cast<double>(word_count[wi]) /
                     static_cast<double>(total_tokens);
          double keep = (std::sqrt(f / cfg.subsample_threshold) + 1.0) *
                        cfg.subsample_threshold / f;
          if (keep < 1.0 && rng.unit() >= keep) continue;
        }
        kept.push_back(static_cast<std::size_t>(wi));
      }
      for (std::size_t i = 0; i < kept.size(); ++i) {
        double lr = std::max(
            min_lr,
            start_lr * (1.0 - static_cast<double>(processed) / total_work));
        std::size_t shrink = rng.below(cfg.window);
        std::size_t lo = i >= cfg.window - shrink ? i - (cfg.window - shrink) : 0;
        std::size_t hi = std::min(kept.size(), i + cfg.window - shrink + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          const std::size_t center = kept[i], context = kept[j];
          neg_spans.clear();
          neg_idx.clear();
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            std::size_t cand = neg_table[rng.below(table_size)];
            if (cand == context) continue;
            neg_idx.push_back(cand);
            neg_spans.emplace_back(out_vecs.data() + cand * cfg.dim, cfg.dim);
          }
          sgns_loss_grad(
              t.vec(center),
              std::span<const double>(out_vecs.data() + context * cfg.dim,
                                      cfg.dim),
              neg_spans, g_center, g_context,
              std::span<double>(g_negs.data(), neg_idx.size() * cfg.dim));
          double* vc = t.data.data() + center * cfg.dim;
          double* uc = out_vecs.data() + context * cfg.dim;
          for (std::size_t d = 0; d < cfg.dim; ++d) {
            vc[d] -= lr * g_center[d];
            uc[d] -= lr * g_context[d];
          }
          for (std::size_t k = 0; k < neg_idx.size(); ++k) {
            double* un = out_vecs.data() + neg_idx[k] * cfg.dim;
            for (std::size_t d = 0; d < cfg.dim; ++d)
              un[d] -= lr * g_negs[k * cfg.dim + d];
          }
        }
      }
    }
    for (double x : t.data) {
      if (!std::isfinite(x))
        throw std::runtime_error("skipgram training produced a non-finite "
                                 "embedding component at epoch " +
                                 std::to_string(epoch + 1));
    }
  }
  return t;
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table,
                                        const std::string& word,
                                        std::size_t k) {
  if (k < 1) throw std::invalid_argument("nearest_neighbors: k must be >= 1");
  auto qi = table.find(word);
  if (qi < 0)
    throw std::runtime_error("word not in vocabulary: \"" + word + "\"");
  auto q = table.vec(static_cast<std::size_t>(qi));
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(table.vocab.size());
  for (std::size_t i = 0; i < table.vocab.size(); ++i) {
    if (i == static_cast<std::size_t>(qi)) continue;
    scored.emplace_back(cosine(q, table.vec(i)), i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (scored.size() > k) scored.resize(k);
  std::vector<Neighbor> out;
  out.reserve(scored.size());
  for (auto& [c, i] : scored) out.push_back({table.vocab[i], c});
  return out;
}

}  // namespace dswe
