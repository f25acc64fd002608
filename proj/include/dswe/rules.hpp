#ifndef DSWE_RULES_HPP
#define DSWE_RULES_HPP

#include <cstddef>
#include <regex>
#include <string>
#include <vector>

#include "dswe/corpus.hpp"

namespace dswe {

using ClassLabel = std::string;

enum class BoundaryMode { WholeWord, Prefix };

struct RulePattern {
  std::string source;  // regex as written in the config
  std::regex re;       // compiled with the boundary mode applied
};

struct RuleLayer {
  enum class Kind { Any, Cooccur };
  Kind kind = Kind::Any;
  ClassLabel label;
  std::vector<RulePattern> patterns;  // ANY
  std::vector<RulePattern> set_a;    // COOCCUR
  std::vector<RulePattern> set_b;
};

// Ordered rule layers; the first layer that fires decides the label,
// otherwise default_label applies. Patterns are case-insensitive.
struct RuleSet {
  std::string task;
  ClassLabel default_label;
  BoundaryMode boundary_mode = BoundaryMode::WholeWord;
  std::vector<RuleLayer> layers;
  std::vector<ClassLabel> labels;  // declared or collected, in first-use order

  std::string to_config() const;
};

struct TraceEntry {
  std::size_t layer;
  std::string pattern;
  std::size_t begin;
  std::size_t end;  // matched span [begin, end) in the raw text
};

struct WeakLabel {
  std::string doc_id;
  ClassLabel label;
  std::vector<TraceEntry> trace;  // empty iff no layer fired
};

// Line-oriented config, '#' comments:
//   task <name>
//   labels <l1> <l2> ...          (optional declaration)
//   default <label>
//   boundary whole-word|prefix
//   layer any <label>:
//     pattern <regex>
//   layer cooccur <label> scope sentence:
//     seta <regex>
//     setb <regex>
// Errors carry the offending line number.
RuleSet parse_ruleset(const std::string& config_text,
                      const std::string& name = "<config>");
RuleSet load_ruleset(const std::string& path);

WeakLabel apply_ruleset(const RuleSet& rs, const Document& doc);

// One WeakLabel per document, order preserved; identical output for any
// thread count.
std::vector<WeakLabel> label_corpus(const RuleSet& rs,
                                    const std::vector<Document>& corpus,
                                    unsigned threads = 1);

}  // namespace dswe

#endif  // DSWE_RULES_HPP
