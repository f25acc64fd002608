#include "dswe/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dswe/model_io.hpp"
#include "dswe/util.hpp"

namespace dswe {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

SynthConfig parse_synth(const json& j) {
  SynthConfig s;
  s.n_docs = j.at("n").get<std::size_t>();
  if (j.contains("priors"))
    s.class_priors = j["priors"].get<std::map<std::string, double>>();
  else
    s.class_priors = {{"fracture", 0.45}, {"negative", 0.55}};
  s.bank = j.contains("bank") ? load_template_bank(j["bank"].get<std::string>())
                              : default_template_bank();
  s.misspell_rate = j.value("misspell", 0.025);
  s.cross_sentence_rate = j.value("cross_sentence", 0.025);
  s.negation_trap_rate = j.value("negation_trap", 0.03);
  s.seed = j.value("seed", std::uint64_t{1});
  return s;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& name) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(name + ": bad config JSON: " + e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("corpus") && !j["corpus"].is_null())
    cfg.corpus_path = j["corpus"].get<std::string>();
  if (j.contains("synth") && !j["synth"].is_null())
    cfg.synth = parse_synth(j["synth"]);
  require(!cfg.corpus_path.empty() || cfg.synth.has_value(),
          name + ": config needs corpus or synth");
  require(!(j.contains("corpus") && !j["corpus"].is_null() &&
            cfg.synth.has_value()),
          name + ": corpus and synth are mutually exclusive");
  cfg.rules_path = j.at("rules").get<std::string>();
  cfg.positive_class = j.at("positive").get<std::string>();
  cfg.test_size = j.value("test_size", std::size_t{500});
  cfg.test_path = j.value("test", std::string{});
  if (j.contains("methods"))
    cfg.methods = j["methods"].get<std::map<std::string, std::string>>();
  else
    cfg.methods = {{"svm", "mean"}, {"rf", "mean"}, {"cnn", "tokens"}};
  cfg.embeddings_path = j.value("embeddings", std::string{});
  if (j.contains("skipgram")) {
    const auto& s = j["skipgram"];
    cfg.skipgram.dim = s.value("dim", cfg.skipgram.dim);
    cfg.skipgram.window = s.value("window", cfg.skipgram.window);
    cfg.skipgram.negatives = s.value("negatives", cfg.skipgram.negatives);
    cfg.skipgram.epochs = s.value("epochs", cfg.skipgram.epochs);
    cfg.skipgram.learning_rate = s.value("lr", cfg.skipgram.learning_rate);
    cfg.skipgram.min_count = s.value("min_count", cfg.skipgram.min_count);
    cfg.skipgram.subsample_threshold =
        s.value("subsample", cfg.skipgram.subsample_threshold);
  }
  if (j.contains("svm")) {
    const auto& s = j["svm"];
    cfg.svm.lambda = s.value("lambda", cfg.svm.lambda);
    cfg.svm.epochs = s.value("epochs", cfg.svm.epochs);
  }
  if (j.contains("rf")) {
    const auto& s = j["rf"];
    cfg.rf.n_trees = s.value("n_trees", cfg.rf.n_trees);
    cfg.rf.max_depth = s.value("max_depth", cfg.rf.max_depth);
    cfg.rf.min_leaf = s.value("min_leaf", cfg.rf.min_leaf);
    cfg.rf.features_per_split = s.value("mtry", cfg.rf.features_per_split);
    cfg.rf.bootstrap = s.value("bootstrap", cfg.rf.bootstrap);
  }
  if (j.contains("cnn")) {
    const auto& s = j["cnn"];
    cfg.cnn.max_len = s.value("max_len", cfg.cnn.max_len);
    cfg.cnn.lr = s.value("lr", cfg.cnn.lr);
    cfg.cnn.batch = s.value("batch", cfg.cnn.batch);
    cfg.cnn.epochs = s.value("epochs", cfg.cnn.epochs);
    cfg.cnn.finetune_embeddings =
        s.value("finetune", cfg.cnn.finetune_embeddings);
  }
  if (j.contains("lda")) {
    const auto& s = j["lda"];
    cfg.lda.topics = s.value("topics", cfg.lda.topics);
    cfg.lda.iterations = s.value("iterations", cfg.lda.iterations);
    cfg.lda.alpha = s.value("alpha", cfg.lda.alpha);
    cfg.lda.beta = s.value("beta", cfg.lda.beta);
  }
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.data_seed = j.value("data_seed", std::uint64_t{0});
  for (const auto& [method, feat] : cfg.methods) {
    require(method == "svm" || method == "rf" || method == "cnn",
            name + ": unknown method \"" + method + "\"");
    if (method == "cnn")
      require(feat == "tokens", name + ": cnn consumes token documents; "
              "featurizer \"" + feat + "\" is not applicable");
    else
      require(feat == "mean" || feat == "tfidf" || feat == "topic",
              name + ": " + method + " needs a vector featurizer "
              "(mean|tfidf|topic), got \"" + feat + "\"");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path);
}

namespace {

struct SplitData {
  std::vector<Document> train, test;
  std::map<std::string, std::string> perturbation_by_id;
};

SplitData prepare_data(const ExperimentConfig& cfg) {
  SplitData d;
  std::vector<Document> all;
  if (cfg.synth) {
    SynthResult s = synth_generate(*cfg.synth);
    for (std::size_t i = 0; i < s.docs.size(); ++i)
      d.perturbation_by_id[s.docs[i].id] = s.perturbations[i];
    all = std::move(s.docs);
  } else {
    all = load_corpus(cfg.corpus_path);
  }
  if (!cfg.test_path.empty()) {
    d.train = std::move(all);
    d.test = load_corpus(cfg.test_path);
  } else {
    require(cfg.test_size < all.size(),
            "test_size must be smaller than the corpus");
    // operate on sorted ids so the split is invariant to corpus order
    std::vector<std::size_t> idx(all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return all[a].id < all[b].id;
    });
    Rng rng(derive_seed(cfg.data_seed ? cfg.data_seed : cfg.seed, "split"));
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i < cfg.test_size)
        d.test.push_back(all[idx[i]]);
      else
        d.train.push_back(all[idx[i]]);
    }
  }
  for (const auto& doc : d.test)
    require(doc.gold.has_value(),
            "test document \"" + doc.id + "\" has no gold label");
  return d;
}

struct TrainedStack {
  EmbeddingTable table;
  bool has_table = false;
  CorpusStats stats;
  bool has_stats = false;
  TopicModel topics;
  bool has_topics = false;
};

std::vector<FeatureVector> featurize_all(
    const std::string& kind, const std::vector<TokenizedDocument>& docs,
    const TrainedStack& stack) {
  std::vector<FeatureVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    if (kind == "mean")
      out.push_back(mean_embedding(d, stack.table));
    else if (kind == "tfidf")
      out.push_back(tfidf_vector(d, stack.stats));
    else if (kind == "topic")
      out.push_back(topic_feature(d, stack.topics));
    else
      throw std::runtime_error("unknown featurizer: " + kind);
  }
  return out;
}

EvalReport make_report(const std::vector<std::string>& preds,
                       const std::vector<std::string>& golds,
                       const ExperimentConfig& cfg, const std::string& method,
                       const std::string& featurizer, std::size_t train_size) {
  EvalReport r;
  r.counts = confusion(preds, golds, cfg.positive_class);
  r.metrics = prf(r.counts);
  r.metadata["method"] = method;
  r.metadata["featurizer"] = featurizer;
  r.metadata["train_size"] = std::to_string(train_size);
  r.metadata["seed"] = std::to_string(cfg.seed);
  r.metadata["rules"] = cfg.rules_path;
  r.metadata["positive"] = cfg.positive_class;
  return r;
}

// Train the configured methods on (train docs, weak labels) and predict
// the test docs. Shared by run_paradigm and the curve cells.
void run_methods(const ExperimentConfig& cfg,
                 const std::vector<Document>& train,
                 const std::vector<std::string>& weak_labels,
                 const std::vector<TokenizedDocument>& train_tok,
                 const std::vector<TokenizedDocument>& test_tok,
                 ParadigmResult& result) {
  TrainedStack stack;
  bool need_table = !cfg.methods.empty() &&
                    std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                [](const auto& kv) {
                                  return kv.second == "mean" ||
                                         kv.second == "tokens";
                                });
  if (need_table) {
    if (!cfg.embeddings_path.empty()) {
      stack.table = load_embeddings(cfg.embeddings_path);
    } else {
      SkipgramConfig sg = cfg.skipgram;
      sg.seed = derive_seed(cfg.seed, "skipgram");
      std::vector<std::vector<std::string>> token_docs;
      token_docs.reserve(train_tok.size());
      for (const auto& t : train_tok) token_docs.push_back(t.tokens);
      stack.table = train_skipgram(token_docs, sg);
    }
    stack.has_table = true;
  }
  for (const auto& [method, feat] : cfg.methods) {
    if (feat == "tfidf" && !stack.has_stats) {
      stack.stats = fit_corpus_stats(train_tok);
      stack.has_stats = true;
    }
    if (feat == "topic" && !stack.has_topics) {
      double alpha = cfg.lda.alpha > 0
                         ? cfg.lda.alpha
                         : 50.0 / static_cast<double>(cfg.lda.topics);
      stack.topics = fit_lda(train_tok, cfg.lda.topics, cfg.lda.iterations,
                             alpha, cfg.lda.beta, derive_seed(cfg.seed, "lda"));
      stack.has_topics = true;
    }
  }

  for (const auto& [method, feat] : cfg.methods) {
    std::vector<std::string> preds;
    preds.reserve(test_tok.size());
    if (method == "cnn") {
      std::vector<std::vector<std::string>> docs;
      docs.reserve(train.size());
      for (const auto& t : train_tok) docs.push_back(t.tokens);
      CnnHyper hy = cfg.cnn;
      hy.seed = derive_seed(cfg.seed, "cnn");
      CnnModel model = train_cnn(docs, weak_labels, stack.table, hy);
      for (const auto& t : test_tok)
        preds.push_back(cnn_predict(model, t.tokens).label);
    } else if (method == "svm") {
      auto xs = featurize_all(feat, train_tok, stack);
      SvmHyper hy = cfg.svm;
      hy.seed = derive_seed(cfg.seed, "svm");
      SvmModel model = train_svm(xs, weak_labels, hy);
      for (const auto& fv : featurize_all(feat, test_tok, stack))
        preds.push_back(svm_predict(model, fv).label);
    } else {
      auto xs = featurize_all(feat, train_tok, stack);
      RfHyper hy = cfg.rf;
      hy.seed = derive_seed(cfg.seed, "rf");
      RfModel model = train_rf(xs, weak_labels, hy);
      for (const auto& fv : featurize_all(feat, test_tok, stack))
        preds.push_back(rf_predict(model, fv).label);
    }
    result.reports.push_back(make_report(preds, result.test_golds, cfg, method,
                                         feat, train.size()));
    result.predictions[method] = std::move(preds);
  }
}

}  // namespace

ParadigmResult run_paradigm(const ExperimentConfig& cfg) {
  SplitData data = prepare_data(cfg);
  RuleSet rs = load_ruleset(cfg.rules_path);

  ParadigmResult result;
  result.test_docs = data.test;
  result.perturbation_by_id = std::move(data.perturbation_by_id);
  for (const auto& doc : data.test) result.test_golds.push_back(*doc.gold);

  std::vector<WeakLabel> weak = label_corpus(rs, data.train);
  std::vector<std::string> weak_labels;
  weak_labels.reserve(weak.size());
  for (const auto& w : weak) weak_labels.push_back(w.label);

  result.test_rule_labels = label_corpus(rs, data.test);
  std::vector<std::string> rule_preds;
  for (const auto& w : result.test_rule_labels) rule_preds.push_back(w.label);
  result.reports.push_back(make_report(rule_preds, result.test_golds, cfg,
                                       "rule", "rules", data.train.size()));
  result.predictions["rule"] = std::move(rule_preds);

  std::vector<TokenizedDocument> train_tok, test_tok;
  train_tok.reserve(data.train.size());
  for (const auto& d : data.train) train_tok.push_back(tokenize_document(d));
  test_tok.reserve(data.test.size());
  for (const auto& d : data.test) test_tok.push_back(tokenize_document(d));

  run_methods(cfg, data.train, weak_labels, train_tok, test_tok, result);
  return result;
}

CurveReport run_curve(const ExperimentConfig& cfg,
                      const std::vector<std::size_t>& sizes) {
  for (std::size_t i = 1; i < sizes.size(); ++i)
    require(sizes[i] > sizes[i - 1], "curve sizes must be strictly increasing");

  SplitData data = prepare_data(cfg);
  RuleSet rs = load_ruleset(cfg.rules_path);

  // nested sampling: one shuffle of the sorted train ids; every size is a
  // prefix of the next
  std::vector<std::size_t> idx(data.train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data.train[a].id < data.train[b].id;
  });
  Rng rng(derive_seed(cfg.data_seed ? cfg.data_seed : cfg.seed, "curve"));
  rng.shuffle(idx);

  std::vector<TokenizedDocument> test_tok;
  test_tok.reserve(data.test.size());
  for (const auto& d : data.test) test_tok.push_back(tokenize_document(d));
  std::vector<std::string> test_golds;
  for (const auto& doc : data.test) test_golds.push_back(*doc.gold);

  std::vector<WeakLabel> test_rule = label_corpus(rs, data.test);
  std::vector<std::string> rule_preds;
  for (const auto& w : test_rule) rule_preds.push_back(w.label);

  CurveReport curve;
  for (std::size_t size : sizes) {
    require(size <= data.train.size(),
            "curve size " + std::to_string(size) +
                " exceeds available training documents (" +
                std::to_string(data.train.size()) + ")");
    std::vector<Document> train;
    train.reserve(size);
    for (std::size_t i = 0; i < size; ++i) train.push_back(data.train[idx[i]]);

    std::vector<WeakLabel> weak = label_corpus(rs, train);
    std::vector<std::string> weak_labels;
    for (const auto& w : weak) weak_labels.push_back(w.label);
    std::vector<TokenizedDocument> train_tok;
    train_tok.reserve(train.size());
    for (const auto& d : train) train_tok.push_back(tokenize_document(d));

    ExperimentConfig cell_cfg = cfg;
    cell_cfg.seed = derive_seed(cfg.seed, "cell:" + std::to_string(size));

    ParadigmResult cell;
    cell.test_docs = data.test;
    cell.test_golds = test_golds;
    cell.reports.push_back(make_report(rule_preds, test_golds, cell_cfg, "rule",
                                       "rules", size));
    cell.predictions["rule"] = rule_preds;
    run_methods(cell_cfg, train, weak_labels, train_tok, test_tok, cell);

    CurvePoint point;
    point.train_size = size;
    for (auto& r : cell.reports) point.by_method[r.metadata["method"]] = r;
    curve.points.push_back(std::move(point));
  }
  return curve;
}

void write_curve_csv(const CurveReport& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve csv: " + path);
  out << "size,method,precision,recall,f1\n";
  for (const auto& point : curve.points) {
    for (const auto& [method, report] : point.by_method) {
      out << point.train_size << "," << method << ","
          << metric_str(report.metrics.precision) << ","
          << metric_str(report.metrics.recall) << ","
          << metric_str(report.metrics.f1) << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dswe
