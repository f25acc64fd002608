#ifndef DSWE_SYNTH_HPP
#define DSWE_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dswe/corpus.hpp"

namespace dswe {

// Text templates per class. Templates may contain {slot} placeholders
// filled from slot_pools. cross_sentence variants keep the class's key
// phrase but spread it over two sentences; trap variants read as the
// opposite class to a keyword matcher while the gold label stays put.
struct TemplateBank {
  std::map<std::string, std::vector<std::string>> class_templates;
  std::map<std::string, std::vector<std::string>> cross_sentence_templates;
  std::map<std::string, std::vector<std::string>> trap_templates;
  std::map<std::string, std::vector<std::string>> slot_pools;
  std::map<std::string, std::string> misspellings;
  std::vector<std::string> filler;
};

struct SynthConfig {
  std::size_t n_docs = 0;
  std::map<std::string, double> class_priors;  // must sum to 1
  TemplateBank bank;
  double misspell_rate = 0.0;
  double cross_sentence_rate = 0.0;
  double negation_trap_rate = 0.0;
  std::uint64_t seed = 0;
  std::string id_prefix = "synth-";
};

struct SynthResult {
  std::vector<Document> docs;            // every doc carries a gold label
  std::vector<std::string> perturbations;  // aligned with docs: none,
                                           // misspell, cross_sentence,
                                           // negation_trap
};

// Hip-fracture flavored bank whose keywords line up with the shipped
// fracture rule file: same-sentence keyword+modifier positives, keyword-only
// and off-site negatives, negation traps, and misspellings that no rule
// pattern matches.
TemplateBank default_template_bank();

TemplateBank load_template_bank(const std::string& path);

SynthResult synth_generate(const SynthConfig& cfg);

}  // namespace dswe

#endif  // DSWE_SYNTH_HPP
