#include <stdexcept>
#include <doctest.h>

#include <algorithm>
#include <map>

#include "dswe/rules.hpp"
#include "dswe/synth.hpp"
#include "dswe/util.hpp"

using namespace dswe;

namespace {

const char* kRulesDir = DSWE_SOURCE_DIR "/rules/";

Document doc(const std::string& text) { return {"d", text, {}}; }

// reference co-occurrence check: a layer fires iff some sentence matches
// one set_a and one set_b pattern
bool brute_cooccur(const RuleLayer& layer, const std::string& raw) {
  std::string text = lowercased(raw);
  for (auto [b, e] : segment_sentences(text)) {
    std::string sent = text.substr(b, e - b);
    auto hits = [&](const std::vector<RulePattern>& ps) {
      return std::any_of(ps.begin(), ps.end(), [&](const RulePattern& p) {
        return std::regex_search(sent, p.re);
      });
    };
    if (hits(layer.set_a) && hits(layer.set_b)) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE_BEGIN("rules");

TEST_CASE("shipped smoking config: 2 labels, 2 layers, default non-smoker") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "smoking.rules");
  CHECK(rs.task == "smoking");
  CHECK(rs.labels.size() == 2);
  CHECK(rs.layers.size() == 2);
  CHECK(rs.default_label == "non-smoker");
  CHECK(rs.boundary_mode == BoundaryMode::WholeWord);
}

TEST_CASE("ruleset serialization round-trips") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");
  RuleSet back = parse_ruleset(rs.to_config());
  CHECK(back.task == rs.task);
  CHECK(back.default_label == rs.default_label);
  CHECK(back.boundary_mode == rs.boundary_mode);
  REQUIRE(back.layers.size() == rs.layers.size());
  for (std::size_t i = 0; i < rs.layers.size(); ++i) {
    CHECK(back.layers[i].kind == rs.layers[i].kind);
    CHECK(back.layers[i].label == rs.layers[i].label);
    REQUIRE(back.layers[i].set_a.size() == rs.layers[i].set_a.size());
    for (std::size_t p = 0; p < rs.layers[i].set_a.size(); ++p)
      CHECK(back.layers[i].set_a[p].source == rs.layers[i].set_a[p].source);
  }
  CHECK(back.to_config() == rs.to_config());
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(
      parse_ruleset("task t\ndefault a\nlayer any a:\n  pattern ([\n", "cfg"),
      doctest::Contains("cfg:4"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_ruleset("", "cfg"),
                       doctest::Contains("missing default"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_ruleset("task t\nfrobnicate x\n", "cfg"),
                       doctest::Contains("cfg:2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_ruleset("task t\nlabels a b\ndefault c\n", "cfg"),
      doctest::Contains("undeclared label"), std::runtime_error);
}

// The seven Table-3 style snippets: smoking cases 1-3, fracture cases 1-4.
TEST_CASE("smoking snippets match the expected rule outcomes") {
  RuleSet wholeword = load_ruleset(std::string(kRulesDir) + "smoking.rules");
  RuleSet prefix = load_ruleset(std::string(kRulesDir) + "smoking-prefix.rules");
  RuleSet ext = load_ruleset(std::string(kRulesDir) + "smoking-ext.rules");

  // case 1: misspelled "tobaco" is reachable only through the prefix
  // keyword "tob"
  const std::string case1 =
      "She is a taxi driver and she has never used tobaco products";
  CHECK(apply_ruleset(prefix, doc(case1)).label == "smoker");
  CHECK(apply_ruleset(wholeword, doc(case1)).label == "non-smoker");

  // case 2: the negation layer wins on "No smoking after age XXX"
  auto case2 = apply_ruleset(wholeword, doc("No smoking after age XXX"));
  CHECK(case2.label == "non-smoker");
  REQUIRE(!case2.trace.empty());
  CHECK(case2.trace[0].layer == 0);
  CHECK(case2.trace[0].pattern ==
        "(no|non|not|never|negative)\\W*(smoker|smoking|smoked|tobacco)");

  // case 3: known divergence of the plain Table-1 set; the extension
  // layer recovers the production behavior
  const std::string case3 = "Tobacco current use: No never used any";
  CHECK(apply_ruleset(wholeword, doc(case3)).label == "smoker");
  CHECK(apply_ruleset(ext, doc(case3)).label == "non-smoker");
}

TEST_CASE("fracture snippets match the expected rule outcomes") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");

  // case 1: modifier and keyword in different sentences
  CHECK(apply_ruleset(rs, doc("Indications: femur fx... Cannulated screw "
                              "fixation of the right femoral neck"))
            .label == "negative");
  // case 2: no modifier at all
  CHECK(apply_ruleset(rs, doc("Pin fixation across the proximal left femoral "
                              "neck"))
            .label == "negative");
  // case 3: "Fx ... Cervical" co-occur in one sentence
  CHECK(apply_ruleset(rs, doc("Exam: Sp Cerv*2vw Flex/Ext only Indications: "
                              "Fx Vertebra Cervical Closed"))
            .label == "fracture");
  // case 4: "fx" and "neck" in the same sentence
  auto case4 = apply_ruleset(rs, doc("Exam: R Major Jnt Asp and/or Inj "
                                     "Indications: R hip inj/marc/steroid; "
                                     "fx: femur neck nos closed, pain hip"));
  CHECK(case4.label == "fracture");
  REQUIRE(case4.trace.size() == 2);
}

TEST_CASE("negation precedes keywords: both-match text goes to the negation "
          "layer") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "smoking.rules");
  auto w = apply_ruleset(rs, doc("patient denies smoking but smoked years ago"));
  CHECK(w.label == "non-smoker");
  REQUIRE(!w.trace.empty());
  CHECK(w.trace[0].layer == 0);
}

TEST_CASE("no pattern match falls back to the default with empty trace") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "smoking.rules");
  auto w = apply_ruleset(rs, doc("nothing relevant here"));
  CHECK(w.label == "non-smoker");
  CHECK(w.trace.empty());
  // a negation match produces the default label with a non-empty trace
  auto neg = apply_ruleset(rs, doc("denies smoking"));
  CHECK(neg.label == "non-smoker");
  CHECK(!neg.trace.empty());
}

TEST_CASE("repeated application agrees with itself") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");
  Document d = doc("fx of the femoral neck. otherwise unremarkable");
  auto a = apply_ruleset(rs, d);
  auto b = apply_ruleset(rs, d);
  CHECK(a.label == b.label);
  CHECK(a.trace.size() == b.trace.size());
}

TEST_CASE("cooccur agrees with a brute-force sweep over sentence pairs") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");
  const RuleLayer& layer = rs.layers[0];
  std::vector<std::string> fixtures = {
      "fracture of the femoral neck",
      "fracture seen. the femoral neck is intact",
      "fx noted; neck region normal",
      "the neck shows a displaced fragment",
      "no findings. nothing here",
      "broken greater trochanter on the left",
      "fracture. neck. fracture. neck.",
      "intertrochanteric fx confirmed",
  };
  for (const auto& text : fixtures) {
    bool fired = apply_ruleset(rs, doc(text)).label == "fracture";
    CHECK(fired == brute_cooccur(layer, text));
  }
}

TEST_CASE("label_corpus is order-preserving, pure, and thread-invariant") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");
  CHECK(label_corpus(rs, {}).empty());

  SynthConfig cfg;
  cfg.n_docs = 600;
  cfg.class_priors = {{"fracture", 0.45}, {"negative", 0.55}};
  cfg.bank = default_template_bank();
  cfg.misspell_rate = 0.05;
  cfg.cross_sentence_rate = 0.05;
  cfg.negation_trap_rate = 0.05;
  cfg.seed = 11;
  auto corpus = synth_generate(cfg).docs;

  auto seq = label_corpus(rs, corpus, 1);
  REQUIRE(seq.size() == corpus.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
    CHECK(seq[i].doc_id == corpus[i].id);

  auto par = label_corpus(rs, corpus, 4);
  REQUIRE(par.size() == seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(par[i].doc_id == seq[i].doc_id);
    CHECK(par[i].label == seq[i].label);
  }

  // shuffling the corpus permutes but does not change the labels
  auto shuffled = corpus;
  Rng rng(5);
  rng.shuffle(shuffled);
  auto lab2 = label_corpus(rs, shuffled);
  std::map<std::string, std::string> by_id;
  for (const auto& w : seq) by_id[w.doc_id] = w.label;
  for (const auto& w : lab2) CHECK(by_id.at(w.doc_id) == w.label);
}

TEST_CASE("label_corpus covers a 31861-document corpus") {
  RuleSet rs = load_ruleset(std::string(kRulesDir) + "fracture.rules");
  SynthConfig cfg;
  cfg.n_docs = 31861;
  cfg.class_priors = {{"fracture", 0.45}, {"negative", 0.55}};
  cfg.bank = default_template_bank();
  cfg.seed = 12;
  auto corpus = synth_generate(cfg).docs;
  CHECK(label_corpus(rs, corpus).size() == 31861);
}

TEST_SUITE_END();
