#include <stdexcept>
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dswe/experiment.hpp"
#include "dswe/util.hpp"

using namespace dswe;

namespace {

const char* kRulesDir = DSWE_SOURCE_DIR "/rules/";

// small, fast configuration used across the driver tests
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  SynthConfig s;
  s.n_docs = 360;
  s.class_priors = {{"fracture", 0.45}, {"negative", 0.55}};
  s.bank = default_template_bank();
  s.misspell_rate = 0.05;
  s.cross_sentence_rate = 0.03;
  s.negation_trap_rate = 0.03;
  s.seed = 41;
  cfg.synth = s;
  cfg.rules_path = std::string(kRulesDir) + "fracture.rules";
  cfg.positive_class = "fracture";
  cfg.test_size = 60;
  cfg.methods = {{"svm", "mean"}};
  cfg.skipgram.dim = 12;
  cfg.skipgram.epochs = 2;
  cfg.svm.epochs = 5;
  cfg.seed = 7;
  return cfg;
}

bool reports_equal(const EvalReport& a, const EvalReport& b) {
  return a.counts.tp == b.counts.tp && a.counts.fp == b.counts.fp &&
         a.counts.fn == b.counts.fn && a.counts.tn == b.counts.tn &&
         a.metadata == b.metadata;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("run_paradigm produces a report per method plus the rule labeler") {
  auto result = run_paradigm(tiny_config());
  REQUIRE(result.reports.size() == 2);
  CHECK(result.reports[0].metadata.at("method") == "rule");
  CHECK(result.reports[1].metadata.at("method") == "svm");
  CHECK(result.reports[1].metadata.at("featurizer") == "mean");
  CHECK(result.reports[0].metadata.at("train_size") == "300");
  CHECK(result.test_docs.size() == 60);
  CHECK(result.predictions.at("svm").size() == 60);
  for (const auto& r : result.reports)
    CHECK(r.counts.total() == 60);
}

TEST_CASE("identical config and seed reproduce identical reports") {
  auto a = run_paradigm(tiny_config());
  auto b = run_paradigm(tiny_config());
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i)
    CHECK(reports_equal(a.reports[i], b.reports[i]));
}

TEST_CASE("the rule labeler scores F1 = 1 against its own weak labels") {
  // harness sanity: evaluating rules on the labels they produced
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");
  SynthConfig s = *tiny_config().synth;
  auto docs = synth_generate(s).docs;
  auto weak = label_corpus(rs, docs);
  std::vector<std::string> preds, golds;
  for (const auto& w : weak) {
    preds.push_back(w.label);
    golds.push_back(w.label);
  }
  auto m = prf(confusion(preds, golds, "fracture"));
  CHECK(*m.f1 == doctest::Approx(1.0));
}

TEST_CASE("missing gold labels in the test split are an error") {
  auto cfg = tiny_config();
  std::string corpus_path = "dswe_test_nogold.jsonl";
  {
    std::ofstream out(corpus_path);
    for (int i = 0; i < 50; ++i)
      out << "{\"id\":\"d" << i << "\",\"text\":\"the femoral neck appears "
          << "intact\"}\n";
  }
  cfg.synth.reset();
  cfg.corpus_path = corpus_path;
  cfg.test_size = 10;
  CHECK_THROWS_WITH_AS(run_paradigm(cfg), doctest::Contains("gold"),
                       std::runtime_error);
  std::remove(corpus_path.c_str());
}

TEST_CASE("paradigm metrics are invariant under corpus file order") {
  auto cfg = tiny_config();
  auto docs = synth_generate(*cfg.synth).docs;
  auto write_corpus = [](const std::vector<Document>& ds, const std::string& p) {
    std::ofstream out(p);
    for (const auto& d : ds)
      out << "{\"id\":\"" << d.id << "\",\"text\":\"" << d.text
          << "\",\"gold\":\"" << *d.gold << "\"}\n";
  };
  std::string p1 = "dswe_test_order1.jsonl", p2 = "dswe_test_order2.jsonl";
  write_corpus(docs, p1);
  auto shuffled = docs;
  Rng rng(3);
  rng.shuffle(shuffled);
  write_corpus(shuffled, p2);

  cfg.synth.reset();
  cfg.corpus_path = p1;
  auto a = run_paradigm(cfg);
  cfg.corpus_path = p2;
  auto b = run_paradigm(cfg);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i)
    CHECK(reports_equal(a.reports[i], b.reports[i]));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("run_curve: one point per size, strictly increasing, csv output") {
  auto cfg = tiny_config();
  auto curve = run_curve(cfg, {50, 120});
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[0].train_size == 50);
  CHECK(curve.points[1].train_size == 120);
  for (const auto& p : curve.points) {
    CHECK(p.by_method.count("rule") == 1);
    CHECK(p.by_method.count("svm") == 1);
  }
  std::string path = "dswe_test_curve.csv";
  write_curve_csv(curve, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "size,method,precision,recall,f1");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);
  std::remove(path.c_str());

  CHECK_THROWS(run_curve(cfg, {50, 50}));
  CHECK_THROWS_WITH_AS(run_curve(cfg, {100000}), doctest::Contains("exceeds"),
                       std::runtime_error);
}

TEST_CASE("default curve sizes are the standard five") {
  CHECK(default_curve_sizes() ==
        std::vector<std::size_t>{1000, 2500, 5000, 10000, 20000});
}

TEST_CASE("config parser rejects mismatched featurizers") {
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(R"({"synth":{"n":10},"rules":"r","positive":"p",
        "methods":{"cnn":"tfidf"}})"),
      doctest::Contains("cnn"), std::runtime_error);
  CHECK_THROWS(parse_experiment_config(R"({"rules":"r","positive":"p"})"));
  CHECK_THROWS(parse_experiment_config("not json"));
  auto cfg = parse_experiment_config(
      R"({"synth":{"n":10},"rules":"r","positive":"p",
          "methods":{"cnn":"tokens","svm":"tfidf"}})");
  CHECK(cfg.methods.at("cnn") == "tokens");
}

TEST_SUITE_END();
