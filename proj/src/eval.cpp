#include "dswe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "dswe/util.hpp"

namespace dswe {

ConfusionCounts confusion(const std::vector<std::string>& preds,
                          const std::vector<std::string>& golds,
                          const std::string& positive_class) {
  if (preds.size() != golds.size())
    throw std::invalid_argument("confusion: " + std::to_string(preds.size()) +
                                " predictions vs " +
                                std::to_string(golds.size()) + " golds");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive_class;
    const bool g = golds[i] == positive_class;
    if (p && g)
      ++c.tp;
    else if (p && !g)
      ++c.fp;
    else if (!p && g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

Metrics prf(const ConfusionCounts& c) {
  Metrics m;
  if (c.tp + c.fp > 0)
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0)
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0)
    m.f1 = 2.0 * (*m.precision * *m.recall) / (*m.precision + *m.recall);
  return m;
}

std::string metric_str(const std::optional<double>& m) {
  return m ? format_double(*m) : "NA";
}

McNemarResult mcnemar(const std::vector<std::string>& preds_a,
                      const std::vector<std::string>& preds_b,
                      const std::vector<std::string>& golds) {
  if (preds_a.size() != golds.size() || preds_b.size() != golds.size())
    throw std::invalid_argument("mcnemar: prediction/gold length mismatch");
  McNemarResult r;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool a_ok = preds_a[i] == golds[i];
    const bool b_ok = preds_b[i] == golds[i];
    if (a_ok && !b_ok) ++r.b;
    if (!a_ok && b_ok) ++r.c;
  }
  const std::size_t n = r.b + r.c;
  if (n == 0) {
    r.p_value = 1.0;
    return r;
  }
  // sum_{i<=min(b,c)} C(n,i)/2^n with incrementally updated terms
  const std::size_t k = std::min(r.b, r.c);
  double term = std::pow(0.5, static_cast<double>(n));  // C(n,0)/2^n
  double tail = term;
  for (std::size_t i = 0; i < k; ++i) {
    term *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    tail += term;
  }
  r.p_value = std::min(1.0, 2.0 * tail);
  return r;
}

double randomization_test(const std::vector<std::string>& preds_a,
                          const std::vector<std::string>& preds_b,
                          const std::vector<std::string>& golds,
                          std::size_t n_permutations, std::uint64_t seed) {
  McNemarResult obs = mcnemar(preds_a, preds_b, golds);
  const std::size_t n = obs.b + obs.c;
  if (n == 0) return 1.0;
  const auto observed = static_cast<std::ptrdiff_t>(obs.b) -
                        static_cast<std::ptrdiff_t>(obs.c);
  Rng rng(seed);
  std::size_t at_least = 0;
  for (std::size_t p = 0; p < n_permutations; ++p) {
    std::ptrdiff_t diff = 0;
    for (std::size_t i = 0; i < n; ++i) diff += rng.unit() < 0.5 ? 1 : -1;
    if (std::abs(diff) >= std::abs(observed)) ++at_least;
  }
  return static_cast<double>(at_least + 1) /
         static_cast<double>(n_permutations + 1);
}

std::vector<Disagreement> diff_cases(
    const std::vector<std::string>& preds_a,
    const std::vector<std::string>& preds_b,
    const std::vector<std::string>& golds, const std::vector<Document>& corpus,
    const std::vector<WeakLabel>* rule_labels) {
  if (preds_a.size() != preds_b.size() || preds_a.size() != golds.size() ||
      preds_a.size() != corpus.size())
    throw std::invalid_argument("diff_cases: input length mismatch");
  std::vector<Disagreement> out;
  for (std::size_t i = 0; i < preds_a.size(); ++i) {
    if (preds_a[i] == preds_b[i]) continue;
    Disagreement d;
    d.doc_id = corpus[i].id;
    d.pred_a = preds_a[i];
    d.pred_b = preds_b[i];
    d.gold = golds[i];
    if (rule_labels && i < rule_labels->size())
      d.rule_trace = (*rule_labels)[i].trace;
    out.push_back(std::move(d));
  }
  return out;
}

void write_reports(const std::vector<EvalReport>& reports,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  for (const auto& r : reports) {
    nlohmann::json j;
    for (const auto& [k, v] : r.metadata) j[k] = v;
    j["tp"] = r.counts.tp;
    j["fp"] = r.counts.fp;
    j["fn"] = r.counts.fn;
    j["tn"] = r.counts.tn;
    auto put = [&](const char* key, const std::optional<double>& m) {
      if (m)
        j[key] = *m;
      else
        j[key] = "NA";
    };
    put("precision", r.metrics.precision);
    put("recall", r.metrics.recall);
    put("f1", r.metrics.f1);
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dswe
