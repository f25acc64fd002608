#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dswe/embeddings.hpp"
#include "dswe/util.hpp"

using namespace dswe;

namespace {

std::string temp_path(const std::string& stem) {
  return std::string("dswe_test_") + stem;
}

EmbeddingTable make_table(std::vector<std::string> vocab,
                          std::vector<std::vector<double>> rows) {
  EmbeddingTable t;
  t.dim = rows[0].size();
  t.vocab = std::move(vocab);
  for (const auto& r : rows) t.data.insert(t.data.end(), r.begin(), r.end());
  t.rebuild_index();
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("embeddings");

TEST_CASE("load accepts the word2vec text format") {
  std::string path = temp_path("emb_ok.txt");
  {
    std::ofstream out(path);
    out << "2 3\nalpha 1 0 0\nbeta 0 1 0.5\n";
  }
  auto t = load_embeddings(path);
  CHECK(t.dim == 3);
  REQUIRE(t.vocab.size() == 2);
  CHECK(t.vocab[0] == "alpha");
  CHECK(t.vec(1)[2] == doctest::Approx(0.5));
  std::remove(path.c_str());
}

TEST_CASE("load rejects arity mismatches and duplicates with row numbers") {
  std::string path = temp_path("emb_bad.txt");
  {
    std::ofstream out(path);
    out << "2 3\nalpha 1 0 0\nbeta 0 1\n";
  }
  CHECK_THROWS_WITH_AS(load_embeddings(path), doctest::Contains("row 2"),
                       std::runtime_error);
  {
    std::ofstream out(path);
    out << "2 2\nalpha 1 0\nalpha 0 1\n";
  }
  CHECK_THROWS_WITH_AS(load_embeddings(path), doctest::Contains("duplicate"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("save/load round-trips within float32 precision") {
  auto t = make_table({"a", "b"}, {{0.125, -3.25, 1e-3}, {2.5, 0.0, -7.75}});
  std::string path = temp_path("emb_rt.txt");
  save_embeddings(t, path);
  auto back = load_embeddings(path);
  REQUIRE(back.dim == t.dim);
  REQUIRE(back.vocab == t.vocab);
  for (std::size_t i = 0; i < t.vocab.size(); ++i)
    for (std::size_t d = 0; d < t.dim; ++d)
      CHECK(back.vec(i)[d] ==
            doctest::Approx(t.vec(i)[d]).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("saving an empty table is an error; header carries the dim") {
  EmbeddingTable empty;
  CHECK_THROWS(save_embeddings(empty, temp_path("emb_empty.txt")));

  EmbeddingTable t;
  t.dim = 100;
  t.vocab = {"w1", "w2"};
  t.data.assign(200, 0.25);
  t.rebuild_index();
  std::string path = temp_path("emb_hdr.txt");
  save_embeddings(t, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "2 100");
  std::remove(path.c_str());
}

TEST_CASE("sgns analytic gradient matches central finite differences") {
  const std::size_t dim = 7;
  Rng rng(42);
  std::vector<double> vc(dim), uc(dim);
  std::vector<std::vector<double>> negs(3, std::vector<double>(dim));
  for (auto& x : vc) x = rng.range(-1, 1);
  for (auto& x : uc) x = rng.range(-1, 1);
  for (auto& n : negs)
    for (auto& x : n) x = rng.range(-1, 1);

  auto loss_at = [&]() {
    std::vector<double> gc(dim), gx(dim), gn(negs.size() * dim);
    std::vector<std::span<const double>> spans;
    for (auto& n : negs) spans.emplace_back(n.data(), dim);
    return sgns_loss_grad({vc.data(), dim}, {uc.data(), dim}, spans,
                          {gc.data(), dim}, {gx.data(), dim},
                          {gn.data(), gn.size()});
  };

  std::vector<double> gc(dim), gx(dim), gn(negs.size() * dim);
  {
    std::vector<std::span<const double>> spans;
    for (auto& n : negs) spans.emplace_back(n.data(), dim);
    sgns_loss_grad({vc.data(), dim}, {uc.data(), dim}, spans, {gc.data(), dim},
                   {gx.data(), dim}, {gn.data(), gn.size()});
  }

  const double h = 1e-5;
  double max_err = 0;
  auto check_param = [&](double* p, double analytic) {
    const double orig = *p;
    *p = orig + h;
    double lp = loss_at();
    *p = orig - h;
    double lm = loss_at();
    *p = orig;
    double numeric = (lp - lm) / (2 * h);
    double denom = std::abs(analytic) + std::abs(numeric);
    if (denom < 1e-12) return;
    max_err = std::max(max_err,
                       std::abs(analytic - numeric) / std::max(denom, 1e-8));
  };
  for (std::size_t d = 0; d < dim; ++d) check_param(&vc[d], gc[d]);
  for (std::size_t d = 0; d < dim; ++d) check_param(&uc[d], gx[d]);
  for (std::size_t k = 0; k < negs.size(); ++k)
    for (std::size_t d = 0; d < dim; ++d)
      check_param(&negs[k][d], gn[k * dim + d]);
  CHECK(max_err <= 1e-4);
}

TEST_CASE("training is deterministic given the seed") {
  std::vector<std::vector<std::string>> docs = {
      {"aa", "bb", "cc"}, {"bb", "aa", "dd"}, {"cc", "dd", "aa", "bb"}};
  SkipgramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 3;
  cfg.seed = 7;
  auto t1 = train_skipgram(docs, cfg);
  auto t2 = train_skipgram(docs, cfg);
  CHECK(t1.vocab == t2.vocab);
  CHECK(t1.data == t2.data);
}

TEST_CASE("co-occurring words end up closer than words from disjoint "
          "contexts") {
  std::vector<std::vector<std::string>> docs;
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    docs.push_back({"aa", "bb", "ctx1", "ctx2"});
    docs.push_back({"cc", "dd", "other1", "other2"});
  }
  SkipgramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 5;
  cfg.window = 2;
  cfg.seed = 9;
  cfg.subsample_threshold = 0;  // tiny synthetic corpus, keep every token
  auto t = train_skipgram(docs, cfg);
  auto vec = [&](const char* w) { return t.vec(t.index.at(w)); };
  CHECK(cosine(vec("aa"), vec("bb")) > cosine(vec("aa"), vec("cc")));
}

TEST_CASE("training rejects an empty effective vocabulary") {
  SkipgramConfig cfg;
  cfg.min_count = 10;
  CHECK_THROWS(train_skipgram({{"once"}}, cfg));
}

TEST_CASE("nearest_neighbors ranks by cosine and excludes the query") {
  auto t = make_table({"a", "b", "c"}, {{1, 0}, {0, 1}, {1, 1}});
  auto n = nearest_neighbors(t, "a", 2);
  REQUIRE(n.size() == 2);
  CHECK(n[0].word == "c");
  CHECK(n[0].cosine == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(n[1].word == "b");
  CHECK(n[1].cosine == doctest::Approx(0.0));
  CHECK_THROWS(nearest_neighbors(t, "zz", 1));
  CHECK_THROWS(nearest_neighbors(t, "a", 0));
}

TEST_CASE("neighbor ranking is invariant under uniform positive scaling") {
  auto t = make_table({"a", "b", "c", "d"},
                      {{1, 0.2}, {0.4, 1}, {1, 0.9}, {-1, 0.3}});
  auto scaled = t;
  for (auto& x : scaled.data) x *= 3.5;
  auto n1 = nearest_neighbors(t, "a", 3);
  auto n2 = nearest_neighbors(scaled, "a", 3);
  REQUIRE(n1.size() == n2.size());
  for (std::size_t i = 0; i < n1.size(); ++i) {
    CHECK(n1[i].word == n2[i].word);
    CHECK(n1[i].cosine == doctest::Approx(n2[i].cosine));
  }
}

TEST_CASE("cosine is symmetric, bounded, and 1 on itself") {
  auto t = make_table({"a", "b"}, {{0.3, -2, 1}, {5, 0.1, -0.7}});
  auto a = t.vec(0), b = t.vec(1);
  CHECK(cosine(a, b) == doctest::Approx(cosine(b, a)));
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  CHECK(std::abs(cosine(a, b)) <= 1.0 + 1e-12);
}

TEST_SUITE_END();
