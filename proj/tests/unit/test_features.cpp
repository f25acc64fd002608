#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "dswe/features.hpp"
#include "dswe/util.hpp"

using namespace dswe;

namespace {

TokenizedDocument tok_doc(std::vector<std::string> tokens) {
  TokenizedDocument d;
  d.doc_id = "d";
  d.tokens = std::move(tokens);
  d.sentences = {d.tokens};
  return d;
}

EmbeddingTable table2d() {
  EmbeddingTable t;
  t.dim = 2;
  t.vocab = {"p", "q", "r"};
  t.data = {1, 3, 3, 1, -1, -3};
  t.rebuild_index();
  return t;
}

// independent recount of tf-idf for the oracle comparison
std::map<std::string, double> brute_tfidf(
    const TokenizedDocument& doc, const std::vector<TokenizedDocument>& corpus) {
  std::map<std::string, double> out;
  for (const auto& w : doc.tokens) {
    std::size_t count = 0;
    for (const auto& t : doc.tokens)
      if (t == w) ++count;
    std::size_t df = 0;
    for (const auto& d : corpus) {
      bool has = false;
      for (const auto& t : d.tokens) has = has || t == w;
      if (has) ++df;
    }
    if (df == 0 || df == corpus.size()) continue;
    double tf = double(count) / double(doc.tokens.size());
    out[w] = tf * std::log(double(corpus.size()) / double(df));
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("features");

TEST_CASE("mean embedding: identity, symmetry, hand mean") {
  auto t = table2d();
  auto single = mean_embedding(tok_doc({"p"}), t);
  CHECK(single.values == std::vector<double>{1, 3});
  // q = (3,1) and its negation via r = (-1,-3)? use p and a custom pair
  EmbeddingTable pm;
  pm.dim = 2;
  pm.vocab = {"v", "w"};
  pm.data = {2, -5, -2, 5};
  pm.rebuild_index();
  auto zero = mean_embedding(tok_doc({"v", "w"}), pm);
  CHECK(zero.values == std::vector<double>{0, 0});
  auto mean = mean_embedding(tok_doc({"p", "q"}), t);
  CHECK(mean.values == std::vector<double>{2, 2});
}

TEST_CASE("mean embedding OOV policies") {
  auto t = table2d();
  auto skip = mean_embedding(tok_doc({"p", "zzz"}), t, OovPolicy::Skip);
  CHECK(skip.values == std::vector<double>{1, 3});
  auto zero = mean_embedding(tok_doc({"p", "zzz"}), t, OovPolicy::Zero);
  CHECK(zero.values == std::vector<double>{0.5, 1.5});
  auto all_oov = mean_embedding(tok_doc({"zzz"}), t);
  CHECK(all_oov.values == std::vector<double>{0, 0});
  auto empty = mean_embedding(tok_doc({}), t);
  CHECK(empty.values == std::vector<double>{0, 0});
}

TEST_CASE("corpus stats count documents, not occurrences") {
  std::vector<TokenizedDocument> corpus = {
      tok_doc({"a", "b"}), tok_doc({"a", "a", "a", "a", "a"}),
      tok_doc({"a", "c"}), tok_doc({"a"})};
  auto stats = fit_corpus_stats(corpus);
  CHECK(stats.n_docs == 4);
  CHECK(stats.doc_freq.at("a") == 4);
  CHECK(stats.doc_freq.at("b") == 1);
  CHECK_THROWS(fit_corpus_stats({}));

  auto s2 = fit_corpus_stats({tok_doc({"x", "y"}), tok_doc({"z", "w"})});
  CHECK(s2.vocab_index.size() == 4);
}

TEST_CASE("tfidf formula on a hand-checked fixture") {
  // doc of 8 tokens, "kw" twice, df("kw") = 1 of N = 4
  std::vector<TokenizedDocument> corpus = {
      tok_doc({"kw", "kw", "f1", "f2", "f3", "f4", "f5", "f6"}),
      tok_doc({"f1", "f2"}), tok_doc({"f3", "f4"}), tok_doc({"f5", "f6"})};
  auto stats = fit_corpus_stats(corpus);
  auto fv = tfidf_vector(corpus[0], stats);
  CHECK(fv.kind == FeatureVector::Kind::Sparse);
  double kw_weight = fv.at(stats.vocab_index.at("kw"));
  CHECK(kw_weight == doctest::Approx(0.25 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("tfidf drops df==N words and unseen words") {
  std::vector<TokenizedDocument> corpus = {tok_doc({"every", "x"}),
                                           tok_doc({"every", "y"})};
  auto stats = fit_corpus_stats(corpus);
  auto fv = tfidf_vector(corpus[0], stats);
  CHECK(fv.at(stats.vocab_index.at("every")) == 0.0);
  auto unseen = tfidf_vector(tok_doc({"new", "x"}), stats);
  for (const auto& [i, v] : unseen.entries)
    CHECK(i == stats.vocab_index.at("x"));
}

TEST_CASE("term frequencies over a document sum to one") {
  auto doc = tok_doc({"a", "b", "b", "c", "c", "c"});
  std::map<std::string, std::size_t> counts;
  for (const auto& w : doc.tokens) counts[w]++;
  double sum = 0;
  for (auto& [w, c] : counts) sum += double(c) / double(doc.tokens.size());
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tfidf matches a brute-force recount on a 10-document corpus") {
  Rng rng(17);
  std::vector<std::string> words = {"w0", "w1", "w2", "w3", "w4",
                                    "w5", "w6", "w7"};
  std::vector<TokenizedDocument> corpus;
  for (int d = 0; d < 10; ++d) {
    std::vector<std::string> toks;
    std::size_t n = 3 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i)
      toks.push_back(words[rng.below(words.size())]);
    corpus.push_back(tok_doc(toks));
  }
  auto stats = fit_corpus_stats(corpus);
  for (const auto& doc : corpus) {
    auto fv = tfidf_vector(doc, stats);
    auto oracle = brute_tfidf(doc, corpus);
    CHECK(fv.entries.size() == oracle.size());
    for (const auto& [w, expected] : oracle) {
      double got = fv.at(stats.vocab_index.at(w));
      CHECK(std::abs(got - expected) <= 1e-12);
    }
  }
}

TEST_CASE("tfidf weight decreases with df for fixed tf") {
  // df = 1..N-1 for a fixed single-occurrence word in a 6-token doc
  for (std::size_t df = 1; df < 6; ++df) {
    double w1 = (1.0 / 6.0) * std::log(6.0 / double(df));
    double w2 = (1.0 / 6.0) * std::log(6.0 / double(df + 1));
    CHECK(w1 > w2);
    CHECK(w1 >= 0.0);
  }
}

TEST_CASE("featurizers are bag-of-words: token permutation changes nothing") {
  auto t = table2d();
  std::vector<TokenizedDocument> corpus = {
      tok_doc({"p", "q", "r", "p"}), tok_doc({"q", "r"}), tok_doc({"p"})};
  auto stats = fit_corpus_stats(corpus);
  auto model = fit_lda(corpus, 2, 30, 1.0, 0.01, 5);

  auto doc = tok_doc({"p", "q", "r", "p"});
  auto perm = tok_doc({"r", "p", "p", "q"});
  CHECK(mean_embedding(doc, t).values == mean_embedding(perm, t).values);
  CHECK(tfidf_vector(doc, stats).entries == tfidf_vector(perm, stats).entries);
  CHECK(topic_feature(doc, model).values == topic_feature(perm, model).values);
}

TEST_CASE("duplicating a document's tokens changes neither mean nor tf") {
  auto t = table2d();
  auto doc = tok_doc({"p", "q", "r"});
  auto dup = tok_doc({"p", "q", "r", "p", "q", "r"});
  auto m1 = mean_embedding(doc, t);
  auto m2 = mean_embedding(dup, t);
  for (std::size_t i = 0; i < m1.values.size(); ++i)
    CHECK(m1.values[i] == doctest::Approx(m2.values[i]).epsilon(1e-12));

  std::vector<TokenizedDocument> corpus = {doc, tok_doc({"q", "x"}),
                                           tok_doc({"r", "y"})};
  auto stats = fit_corpus_stats(corpus);
  auto f1 = tfidf_vector(doc, stats);
  auto f2 = tfidf_vector(dup, stats);
  REQUIRE(f1.entries.size() == f2.entries.size());
  for (std::size_t i = 0; i < f1.entries.size(); ++i) {
    CHECK(f1.entries[i].first == f2.entries[i].first);
    CHECK(f1.entries[i].second ==
          doctest::Approx(f2.entries[i].second).epsilon(1e-12));
  }
}

TEST_CASE("lda rows are distributions and respect the vocab bound") {
  std::vector<TokenizedDocument> corpus = {
      tok_doc({"a", "b", "c"}), tok_doc({"b", "c", "d"}), tok_doc({"d", "e"})};
  auto model = fit_lda(corpus, 3, 50, 1.0, 0.01, 42);
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    double sum = 0;
    for (std::size_t k = 0; k < model.K; ++k) {
      CHECK(model.word_topic[w * model.K + k] >= 0.0);
      sum += model.word_topic[w * model.K + k];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  CHECK_THROWS(fit_lda(corpus, 50, 10, 1.0, 0.01, 1));
  CHECK_THROWS(fit_lda(corpus, 1, 10, 1.0, 0.01, 1));
  CHECK_THROWS(fit_lda({}, 2, 10, 1.0, 0.01, 1));
}

TEST_CASE("lda recovers two disjoint-vocabulary topics") {
  // generator is the oracle: topic 0 words t0w*, topic 1 words t1w*
  std::vector<std::string> t0 = {"t0a", "t0b", "t0c", "t0d"};
  std::vector<std::string> t1 = {"t1a", "t1b", "t1c", "t1d"};
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 100);
    std::vector<TokenizedDocument> corpus;
    for (int d = 0; d < 120; ++d) {
      const auto& pool = d % 2 == 0 ? t0 : t1;
      std::vector<std::string> toks;
      for (int i = 0; i < 12; ++i) toks.push_back(pool[rng.below(pool.size())]);
      corpus.push_back(tok_doc(toks));
    }
    auto model = fit_lda(corpus, 2, 100, 25.0, 0.01, seed);
    // majority argmax per generator topic
    auto argmax_of = [&](const std::string& w) {
      auto i = model.find(w);
      REQUIRE(i >= 0);
      auto row = model.row(std::size_t(i));
      return row[0] >= row[1] ? 0 : 1;
    };
    std::size_t t0_on0 = 0, t1_on0 = 0;
    for (const auto& w : t0) t0_on0 += argmax_of(w) == 0;
    for (const auto& w : t1) t1_on0 += argmax_of(w) == 0;
    double agree0 = (double(t0_on0) + double(t1.size() - t1_on0)) / 8.0;
    double agree1 = (double(t0.size() - t0_on0) + double(t1_on0)) / 8.0;
    if (std::max(agree0, agree1) >= 0.9) ++passes;
  }
  CHECK(passes >= 3);  // median seed passes
}

TEST_CASE("topic features are mixtures; degenerate docs become uniform") {
  std::vector<TokenizedDocument> corpus = {
      tok_doc({"a", "b", "c"}), tok_doc({"b", "c", "d"}), tok_doc({"d", "e"})};
  auto model = fit_lda(corpus, 2, 50, 1.0, 0.01, 3);

  auto single = topic_feature(tok_doc({"b"}), model);
  auto row = model.row(std::size_t(model.find("b")));
  CHECK(single.values[0] == doctest::Approx(row[0]).epsilon(1e-12));

  auto mix = topic_feature(tok_doc({"a", "b", "d"}), model);
  double sum = 0;
  for (double v : mix.values) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  auto empty = topic_feature(tok_doc({}), model);
  for (double v : empty.values) CHECK(v == doctest::Approx(0.5));
  auto oov = topic_feature(tok_doc({"nope"}), model);
  for (double v : oov.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("lda fit is deterministic and the model round-trips through disk") {
  std::vector<TokenizedDocument> corpus = {
      tok_doc({"a", "b", "c"}), tok_doc({"b", "c", "d"}), tok_doc({"d", "e"})};
  auto m1 = fit_lda(corpus, 2, 40, 1.0, 0.01, 9);
  auto m2 = fit_lda(corpus, 2, 40, 1.0, 0.01, 9);
  CHECK(m1.word_topic == m2.word_topic);

  std::string path = "dswe_test_lda.txt";
  save_topic_model(m1, path);
  auto back = load_topic_model(path);
  CHECK(back.K == m1.K);
  CHECK(back.vocab == m1.vocab);
  CHECK(back.word_topic == m1.word_topic);
  std::remove(path.c_str());
}

TEST_SUITE_END();
