#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <set>

#include "dswe/synth.hpp"

using namespace dswe;

namespace {

SynthConfig base_config(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_docs = n;
  cfg.class_priors = {{"fracture", 0.45}, {"negative", 0.55}};
  cfg.bank = default_template_bank();
  cfg.misspell_rate = 0.05;
  cfg.cross_sentence_rate = 0.025;
  cfg.negation_trap_rate = 0.03;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("equal seeds give identical corpora, different seeds differ") {
  auto a = synth_generate(base_config(200, 1));
  auto b = synth_generate(base_config(200, 1));
  REQUIRE(a.docs.size() == b.docs.size());
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    CHECK(a.docs[i].id == b.docs[i].id);
    CHECK(a.docs[i].text == b.docs[i].text);
    CHECK(a.docs[i].gold == b.docs[i].gold);
    CHECK(a.perturbations[i] == b.perturbations[i]);
  }
  auto c = synth_generate(base_config(200, 2));
  bool any_diff = false;
  for (std::size_t i = 0; i < a.docs.size(); ++i)
    any_diff = any_diff || a.docs[i].text != c.docs[i].text;
  CHECK(any_diff);
}

TEST_CASE("degenerate priors put every document in one class") {
  auto cfg = base_config(100, 3);
  cfg.class_priors = {{"fracture", 1.0}};
  auto res = synth_generate(cfg);
  for (const auto& d : res.docs) CHECK(d.gold == "fracture");
}

TEST_CASE("every document carries a gold label and a perturbation record") {
  auto res = synth_generate(base_config(500, 4));
  REQUIRE(res.docs.size() == 500);
  REQUIRE(res.perturbations.size() == 500);
  std::set<std::string> kinds(res.perturbations.begin(), res.perturbations.end());
  for (const auto& k : kinds)
    CHECK((k == "none" || k == "misspell" || k == "cross_sentence" ||
           k == "negation_trap"));
  for (const auto& d : res.docs) CHECK(d.gold.has_value());
}

// Binomial(10000, 0.05): mean 500, sigma = sqrt(10000*0.05*0.95) ~ 21.79,
// so a 3-sigma band of [435, 565].
TEST_CASE("misspell perturbation count stays within 3 sigma of binomial") {
  auto res = synth_generate(base_config(10000, 5));
  std::size_t misspelled = 0;
  for (const auto& k : res.perturbations)
    if (k == "misspell") ++misspelled;
  CHECK(misspelled >= 435);
  CHECK(misspelled <= 565);
}

TEST_CASE("class frequencies converge to the priors") {
  auto res = synth_generate(base_config(10000, 6));
  std::size_t pos = 0;
  for (const auto& d : res.docs)
    if (d.gold == "fracture") ++pos;
  double frac = static_cast<double>(pos) / 10000.0;
  CHECK(frac > 0.42);
  CHECK(frac < 0.48);
}

TEST_CASE("a class with positive prior but no templates is an error") {
  auto cfg = base_config(10, 7);
  cfg.class_priors["mystery"] = 0.5;
  cfg.class_priors["fracture"] = 0.25;
  cfg.class_priors["negative"] = 0.25;
  CHECK_THROWS_AS(synth_generate(cfg), std::runtime_error);
}

TEST_CASE("priors must sum to one and rates must be rates") {
  auto cfg = base_config(10, 8);
  cfg.class_priors = {{"fracture", 0.7}, {"negative", 0.7}};
  CHECK_THROWS_AS(synth_generate(cfg), std::invalid_argument);
  cfg = base_config(10, 8);
  cfg.misspell_rate = 1.5;
  CHECK_THROWS_AS(synth_generate(cfg), std::invalid_argument);
}

TEST_CASE("misspellings land next to the canonical keyword's context") {
  auto cfg = base_config(2000, 9);
  cfg.misspell_rate = 1.0;  // force it
  cfg.cross_sentence_rate = 0;
  cfg.negation_trap_rate = 0;
  auto res = synth_generate(cfg);
  bool saw_fractrue = false;
  for (const auto& d : res.docs)
    saw_fractrue = saw_fractrue || d.text.find("fractrue") != std::string::npos;
  CHECK(saw_fractrue);
  for (const auto& k : res.perturbations) CHECK(k == "misspell");
}

TEST_SUITE_END();
