#ifndef DSWE_EXPERIMENT_HPP
#define DSWE_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dswe/cnn.hpp"
#include "dswe/eval.hpp"
#include "dswe/random_forest.hpp"
#include "dswe/svm.hpp"
#include "dswe/synth.hpp"

namespace dswe {

struct LdaSpec {
  std::size_t topics = 20;
  std::size_t iterations = 200;
  double alpha = 0.0;  // 0 = 50/K
  double beta = 0.01;
};

// One experiment: corpus (file or synthetic), rule set, featurizer per
// method, model hyperparameters, master seed. Sub-seeds are derived per
// stage so results do not depend on scheduling.
struct ExperimentConfig {
  std::string corpus_path;
  std::optional<SynthConfig> synth;
  std::string rules_path;
  std::string positive_class;
  std::size_t test_size = 500;
  std::string test_path;  // fixed gold test file; overrides test_size split
  std::map<std::string, std::string> methods;  // svm|rf|cnn -> featurizer
  std::string embeddings_path;  // empty = train on the train split
  SkipgramConfig skipgram;
  SvmHyper svm;
  RfHyper rf;
  CnnHyper cnn;
  LdaSpec lda;
  std::uint64_t seed = 1;
  // when nonzero, pins the test split and curve subsampling independently
  // of seed, so multi-seed medians share one data layout
  std::uint64_t data_seed = 0;
};

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& name = "<config>");
ExperimentConfig load_experiment_config(const std::string& path);

struct ParadigmResult {
  std::vector<EvalReport> reports;  // rule first, then configured methods
  std::vector<Document> test_docs;
  std::vector<std::string> test_golds;
  std::map<std::string, std::vector<std::string>> predictions;  // per method
  std::vector<WeakLabel> test_rule_labels;
  std::map<std::string, std::string> perturbation_by_id;  // synthetic runs
};

// Weak-label the train split, featurize, train every configured method
// on the weak labels, evaluate everything (rule labeler included) on the
// held-out gold test split.
ParadigmResult run_paradigm(const ExperimentConfig& cfg);

struct CurvePoint {
  std::size_t train_size = 0;
  std::map<std::string, EvalReport> by_method;
};

struct CurveReport {
  std::vector<CurvePoint> points;  // strictly increasing train sizes
};

inline std::vector<std::size_t> default_curve_sizes() {
  return {1000, 2500, 5000, 10000, 20000};
}

// Nested subsampling: under one seed each size is a prefix of the next.
CurveReport run_curve(const ExperimentConfig& cfg,
                      const std::vector<std::size_t>& sizes);

void write_curve_csv(const CurveReport& curve, const std::string& path);

}  // namespace dswe

#endif  // DSWE_EXPERIMENT_HPP
