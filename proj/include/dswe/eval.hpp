#ifndef DSWE_EVAL_HPP
#define DSWE_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dswe/corpus.hpp"
#include "dswe/rules.hpp"

namespace dswe {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

// Undefined metrics stay unset and serialize as the literal NA.
struct Metrics {
  std::optional<double> precision, recall, f1;
};

struct EvalReport {
  Metrics metrics;
  ConfusionCounts counts;
  std::map<std::string, std::string> metadata;  // method, featurizer, ...
};

ConfusionCounts confusion(const std::vector<std::string>& preds,
                          const std::vector<std::string>& golds,
                          const std::string& positive_class);

Metrics prf(const ConfusionCounts& counts);

std::string metric_str(const std::optional<double>& m);

struct McNemarResult {
  std::size_t b = 0;  // A correct, B wrong
  std::size_t c = 0;  // A wrong, B correct
  double p_value = 1.0;
};

// Exact two-sided binomial test on the discordant pairs:
// p = min(1, 2 * sum_{i<=min(b,c)} C(b+c,i) / 2^(b+c)); p = 1 when b+c = 0.
McNemarResult mcnemar(const std::vector<std::string>& preds_a,
                      const std::vector<std::string>& preds_b,
                      const std::vector<std::string>& golds);

// Seeded approximate randomization over the discordant pairs, for
// cross-checking the exact test.
double randomization_test(const std::vector<std::string>& preds_a,
                          const std::vector<std::string>& preds_b,
                          const std::vector<std::string>& golds,
                          std::size_t n_permutations, std::uint64_t seed);

struct Disagreement {
  std::string doc_id;
  std::string pred_a, pred_b;
  std::string gold;
  std::vector<TraceEntry> rule_trace;
};

// Positions where the two prediction sequences differ, with gold labels
// and (when weak labels are supplied) the firing rule trace.
std::vector<Disagreement> diff_cases(
    const std::vector<std::string>& preds_a,
    const std::vector<std::string>& preds_b,
    const std::vector<std::string>& golds, const std::vector<Document>& corpus,
    const std::vector<WeakLabel>* rule_labels = nullptr);

void write_reports(const std::vector<EvalReport>& reports,
                   const std::string& path);

}  // namespace dswe

#endif  // DSWE_EVAL_HPP
