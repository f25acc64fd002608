// dswe: weak-supervision text classification toolkit.
// Subcommands: synth, label, embed, neighbors, featurize, train, eval,
// curve, diff. Exit codes: 0 success, 1 data/processing error, 2 usage.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dswe/experiment.hpp"
#include "dswe/model_io.hpp"
#include "dswe/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dswe;

namespace {

constexpr const char* kVersion = "1.0.0";

struct ManifestWriter {
  json body;
  std::chrono::steady_clock::time_point started =
      std::chrono::steady_clock::now();

  ManifestWriter(const std::string& command, int argc, char** argv) {
    body["tool"] = "dswe";
    body["version"] = kVersion;
    body["command"] = command;
    json args = json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    body["argv"] = args;
    body["inputs"] = json::array();
    body["outputs"] = json::array();
    body["config"] = json::object();
    body["seeds"] = json::object();
  }
  void input(const std::string& p) { body["inputs"].push_back(p); }
  void output(const std::string& p) { body["outputs"].push_back(p); }
  void config(const std::string& k, const json& v) { body["config"][k] = v; }
  void seed(const std::string& k, std::uint64_t v) { body["seeds"][k] = v; }

  void write(const std::string& path) {
    body["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << body.dump(2) << "\n";
  }
};

std::string manifest_path_for(const std::string& out) {
  return out + ".manifest.json";
}

json doc_to_json(const Document& d) {
  json j;
  j["id"] = d.id;
  j["text"] = d.text;
  if (d.gold) j["gold"] = *d.gold;
  return j;
}

void write_corpus_file(const std::vector<Document>& docs,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus: " + path);
  for (const auto& d : docs) out << doc_to_json(d).dump() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::map<std::string, double> parse_priors(const std::string& spec) {
  std::map<std::string, double> priors;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--priors expects label=prob[,label=prob...]");
    priors[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return priors;
}

struct FeatureRecord {
  std::string id;
  FeatureVector fv;
};

void write_features(const std::vector<FeatureRecord>& feats,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write features: " + path);
  for (const auto& f : feats) {
    json j;
    j["id"] = f.id;
    j["dim"] = f.fv.dim;
    if (f.fv.kind == FeatureVector::Kind::Dense) {
      j["kind"] = "dense";
      j["values"] = f.fv.values;
    } else {
      j["kind"] = "sparse";
      json idx = json::array(), val = json::array();
      for (const auto& [i, v] : f.fv.entries) {
        idx.push_back(i);
        val.push_back(v);
      }
      j["indices"] = idx;
      j["values"] = val;
    }
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<FeatureRecord> load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open features: " + path);
  std::vector<FeatureRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
    FeatureRecord r;
    r.id = j.at("id").get<std::string>();
    r.fv.dim = j.at("dim").get<std::size_t>();
    if (j.at("kind") == "dense") {
      r.fv.kind = FeatureVector::Kind::Dense;
      r.fv.values = j.at("values").get<std::vector<double>>();
    } else {
      r.fv.kind = FeatureVector::Kind::Sparse;
      auto idx = j.at("indices").get<std::vector<std::size_t>>();
      auto val = j.at("values").get<std::vector<double>>();
      if (idx.size() != val.size())
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": indices/values length mismatch");
      for (std::size_t i = 0; i < idx.size(); ++i)
        r.fv.entries.emplace_back(idx[i], val[i]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

struct PredRecord {
  std::string id;
  std::string label;
  std::map<std::string, double> scores;
};

void write_preds(const std::vector<PredRecord>& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions: " + path);
  for (const auto& p : preds) {
    json j;
    j["id"] = p.id;
    j["label"] = p.label;
    j["scores"] = p.scores;
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<PredRecord> load_preds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions: " + path);
  std::vector<PredRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    PredRecord p;
    p.id = j.at("id").get<std::string>();
    p.label = j.at("label").get<std::string>();
    if (j.contains("scores"))
      p.scores = j["scores"].get<std::map<std::string, double>>();
    out.push_back(std::move(p));
  }
  return out;
}

std::string label_field_of(const json& j, const std::string& field,
                           const std::string& id) {
  if (!j.contains(field) || !j[field].is_string())
    throw std::runtime_error("record \"" + id + "\" has no string field \"" +
                             field + "\"");
  return j[field].get<std::string>();
}

// corpus records with arbitrary extra fields preserved as raw json
std::vector<json> load_corpus_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- synth

int cmd_synth(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("synth", "generate a synthetic gold corpus");
  struct SynthOpts {
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::string out, pert_out, bank, priors = "fracture=0.45,negative=0.55";
    std::string id_prefix = "synth-";
    double misspell = 0.025, cross = 0.025, trap = 0.03;
  };
  auto opts = std::make_shared<SynthOpts>();
  sub->add_option("--n", opts->n, "number of documents")->required();
  sub->add_option("--seed", opts->seed, "rng seed");
  sub->add_option("--out", opts->out, "corpus output path")->required();
  sub->add_option("--perturbations-out", opts->pert_out,
                  "perturbation manifest path (default <out>.pert.jsonl)");
  sub->add_option("--bank", opts->bank, "template bank json");
  sub->add_option("--priors", opts->priors, "label=prob[,label=prob...]");
  sub->add_option("--id-prefix", opts->id_prefix, "document id prefix");
  sub->add_option("--misspell", opts->misspell, "misspelled-keyword rate");
  sub->add_option("--cross-sentence", opts->cross, "cross-sentence split rate");
  sub->add_option("--negation-trap", opts->trap, "negation-scope trap rate");

  sub->callback([opts, argc, argv]() {
    SynthConfig cfg;
    cfg.n_docs = opts->n;
    cfg.seed = opts->seed;
    cfg.class_priors = parse_priors(opts->priors);
    cfg.bank = opts->bank.empty() ? default_template_bank()
                                  : load_template_bank(opts->bank);
    cfg.misspell_rate = opts->misspell;
    cfg.cross_sentence_rate = opts->cross;
    cfg.negation_trap_rate = opts->trap;
    cfg.id_prefix = opts->id_prefix;

    ManifestWriter mw("synth", argc, argv);
    mw.seed("synth", cfg.seed);
    mw.config("n", cfg.n_docs);
    mw.config("priors", opts->priors);
    mw.config("misspell", cfg.misspell_rate);
    mw.config("cross_sentence", cfg.cross_sentence_rate);
    mw.config("negation_trap", cfg.negation_trap_rate);

    SynthResult res = synth_generate(cfg);
    write_corpus_file(res.docs, opts->out);
    mw.output(opts->out);

    std::string pert = opts->pert_out.empty() ? opts->out + ".pert.jsonl"
                                              : opts->pert_out;
    {
      std::ofstream out(pert);
      if (!out) throw std::runtime_error("cannot write manifest: " + pert);
      for (std::size_t i = 0; i < res.docs.size(); ++i) {
        json j = doc_to_json(res.docs[i]);
        j["perturbation"] = res.perturbations[i];
        out << j.dump() << "\n";
      }
    }
    mw.output(pert);
    mw.write(manifest_path_for(opts->out));
    std::cout << "wrote " << res.docs.size() << " documents to " << opts->out
              << "\n";
  });
  return 0;
}

// ---------------------------------------------------------------- label

int cmd_label(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("label", "assign weak labels with a rule set");
  struct LabelOpts {
    std::string rules, in, out;
    unsigned threads = 1;
    bool trace = false;
  };
  auto opts = std::make_shared<LabelOpts>();
  sub->add_option("--rules", opts->rules, "rule config file")->required();
  sub->add_option("--in", opts->in, "input corpus")->required();
  sub->add_option("--out", opts->out, "output corpus with weak field")
      ->required();
  sub->add_option("--threads", opts->threads, "labeling threads");
  sub->add_flag("--trace", opts->trace, "include match traces");

  sub->callback([opts, argc, argv]() {
    ManifestWriter mw("label", argc, argv);
    mw.input(opts->rules);
    mw.input(opts->in);
    RuleSet rs = load_ruleset(opts->rules);
    auto docs = load_corpus(opts->in);
    auto weak = label_corpus(rs, docs, opts->threads);
    std::ofstream out(opts->out);
    if (!out) throw std::runtime_error("cannot write: " + opts->out);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      json j = doc_to_json(docs[i]);
      j["weak"] = weak[i].label;
      if (opts->trace) {
        json trace = json::array();
        for (const auto& t : weak[i].trace) {
          trace.push_back({{"layer", t.layer},
                           {"pattern", t.pattern},
                           {"begin", t.begin},
                           {"end", t.end}});
        }
        j["trace"] = trace;
      }
      out << j.dump() << "\n";
    }
    mw.config("task", rs.task);
    mw.output(opts->out);
    mw.write(manifest_path_for(opts->out));
    std::cout << "labeled " << docs.size() << " documents\n";
  });
  return 0;
}

// ---------------------------------------------------------------- embed

int cmd_embed(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("embed", "train skip-gram word embeddings");
  struct EmbedOpts {
    std::string in, out;
    SkipgramConfig cfg;
  };
  auto opts = std::make_shared<EmbedOpts>();
  sub->add_option("--in", opts->in, "corpus to train on")->required();
  sub->add_option("--out", opts->out, "embeddings output")->required();
  sub->add_option("--dim", opts->cfg.dim, "embedding dimension");
  sub->add_option("--window", opts->cfg.window, "context window");
  sub->add_option("--negatives", opts->cfg.negatives, "negative samples");
  sub->add_option("--epochs", opts->cfg.epochs, "training epochs");
  sub->add_option("--lr", opts->cfg.learning_rate, "starting learning rate");
  sub->add_option("--min-count", opts->cfg.min_count, "vocab frequency floor");
  sub->add_option("--subsample", opts->cfg.subsample_threshold,
                  "subsampling threshold");
  sub->add_option("--seed", opts->cfg.seed, "rng seed");

  sub->callback([opts, argc, argv]() {
    ManifestWriter mw("embed", argc, argv);
    mw.input(opts->in);
    mw.seed("skipgram", opts->cfg.seed);
    mw.config("dim", opts->cfg.dim);
    mw.config("window", opts->cfg.window);
    mw.config("epochs", opts->cfg.epochs);
    auto docs = load_corpus(opts->in);
    std::vector<std::vector<std::string>> token_docs;
    token_docs.reserve(docs.size());
    for (const auto& d : docs) token_docs.push_back(tokenize_document(d).tokens);
    auto table = train_skipgram(token_docs, opts->cfg);
    save_embeddings(table, opts->out);
    mw.output(opts->out);
    mw.write(manifest_path_for(opts->out));
    std::cout << "trained " << table.vocab.size() << " vectors of dim "
              << table.dim << "\n";
  });
  return 0;
}

// ------------------------------------------------------------ neighbors

int cmd_neighbors(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("neighbors", "nearest neighbors by cosine");
  struct NeighborOpts {
    std::string embeddings, word, out;
    std::size_t k = 5;
  };
  auto opts = std::make_shared<NeighborOpts>();
  sub->add_option("--embeddings", opts->embeddings, "embeddings file")
      ->required();
  sub->add_option("--word", opts->word, "query word")->required();
  sub->add_option("--k", opts->k, "neighbor count");
  sub->add_option("--out", opts->out, "optional output file");

  sub->callback([opts, argc, argv]() {
    auto table = load_embeddings(opts->embeddings);
    auto neighbors = nearest_neighbors(table, opts->word, opts->k);
    std::ostringstream buf;
    for (const auto& n : neighbors)
      buf << n.word << " " << format_double(n.cosine) << "\n";
    if (opts->out.empty()) {
      std::cout << buf.str();
    } else {
      std::ofstream out(opts->out);
      out << buf.str();
      ManifestWriter mw("neighbors", argc, argv);
      mw.input(opts->embeddings);
      mw.output(opts->out);
      mw.config("word", opts->word);
      mw.config("k", opts->k);
      mw.write(manifest_path_for(opts->out));
    }
  });
  return 0;
}

// ------------------------------------------------------------ featurize

int cmd_featurize(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("featurize", "map documents to vectors");
  struct FeaturizeOpts {
    std::string in, out, kind, embeddings, oov = "skip";
    std::string stats_in, stats_out, lda_in, lda_out;
    std::size_t topics = 20, iterations = 200;
    double alpha = 0.0, beta = 0.01;
    std::uint64_t seed = 1;
  };
  auto opts = std::make_shared<FeaturizeOpts>();
  sub->add_option("--in", opts->in, "corpus to featurize")->required();
  sub->add_option("--out", opts->out, "features output")->required();
  sub->add_option("--kind", opts->kind, "mean|tfidf|topic")->required();
  sub->add_option("--embeddings", opts->embeddings, "embeddings (mean)");
  sub->add_option("--oov", opts->oov, "oov policy for mean: skip|zero");
  sub->add_option("--stats-in", opts->stats_in, "frozen corpus stats (tfidf)");
  sub->add_option("--stats-out", opts->stats_out, "fit stats here (tfidf)");
  sub->add_option("--lda-in", opts->lda_in, "trained topic model");
  sub->add_option("--lda-out", opts->lda_out, "fit a topic model here");
  sub->add_option("--topics", opts->topics, "lda topic count");
  sub->add_option("--iterations", opts->iterations, "gibbs sweeps");
  sub->add_option("--alpha", opts->alpha, "lda alpha (0 = 50/K)");
  sub->add_option("--beta", opts->beta, "lda beta");
  sub->add_option("--seed", opts->seed, "lda seed");

  sub->callback([opts, argc, argv]() {
    ManifestWriter mw("featurize", argc, argv);
    mw.input(opts->in);
    mw.config("kind", opts->kind);
    auto docs = load_corpus(opts->in);
    std::vector<TokenizedDocument> tok;
    tok.reserve(docs.size());
    for (const auto& d : docs) tok.push_back(tokenize_document(d));

    std::vector<FeatureRecord> feats;
    feats.reserve(docs.size());
    if (opts->kind == "mean") {
      if (opts->embeddings.empty())
        throw std::runtime_error("--kind mean needs --embeddings");
      if (opts->oov != "skip" && opts->oov != "zero")
        throw std::runtime_error("--oov must be skip or zero");
      mw.input(opts->embeddings);
      auto table = load_embeddings(opts->embeddings);
      OovPolicy policy =
          opts->oov == "zero" ? OovPolicy::Zero : OovPolicy::Skip;
      for (std::size_t i = 0; i < docs.size(); ++i)
        feats.push_back({docs[i].id, mean_embedding(tok[i], table, policy)});
    } else if (opts->kind == "tfidf") {
      CorpusStats stats;
      if (!opts->stats_in.empty()) {
        mw.input(opts->stats_in);
        stats = load_corpus_stats(opts->stats_in);
      } else {
        stats = fit_corpus_stats(tok);
        if (!opts->stats_out.empty()) {
          save_corpus_stats(stats, opts->stats_out);
          mw.output(opts->stats_out);
        }
      }
      for (std::size_t i = 0; i < docs.size(); ++i)
        feats.push_back({docs[i].id, tfidf_vector(tok[i], stats)});
    } else if (opts->kind == "topic") {
      TopicModel model;
      if (!opts->lda_in.empty()) {
        mw.input(opts->lda_in);
        model = load_topic_model(opts->lda_in);
      } else {
        double alpha = opts->alpha > 0
                           ? opts->alpha
                           : 50.0 / static_cast<double>(opts->topics);
        model = fit_lda(tok, opts->topics, opts->iterations, alpha, opts->beta,
                        opts->seed);
        mw.seed("lda", opts->seed);
        if (!opts->lda_out.empty()) {
          save_topic_model(model, opts->lda_out);
          mw.output(opts->lda_out);
        }
      }
      for (std::size_t i = 0; i < docs.size(); ++i)
        feats.push_back({docs[i].id, topic_feature(tok[i], model)});
    } else {
      throw std::runtime_error("unknown --kind \"" + opts->kind +
                               "\" (mean|tfidf|topic)");
    }
    write_features(feats, opts->out);
    mw.output(opts->out);
    mw.write(manifest_path_for(opts->out));
    std::cout << "featurized " << feats.size() << " documents (" << opts->kind
              << ")\n";
  });
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("train", "train a classifier on weak labels");
  struct TrainOpts {
    std::string model, featurizer, features, labels, in, embeddings, out;
    std::string label_field = "weak";
    std::uint64_t seed = 1;
    std::size_t epochs = 0;
    SvmHyper svm;
    RfHyper rf;
    CnnHyper cnn;
  };
  auto opts = std::make_shared<TrainOpts>();
  sub->add_option("--model", opts->model, "svm|rf|cnn")->required();
  sub->add_option("--featurizer", opts->featurizer,
                  "mean|tfidf|topic (svm/rf) or tokens (cnn)")
      ->required();
  sub->add_option("--features", opts->features, "features jsonl (svm/rf)");
  sub->add_option("--labels", opts->labels, "labeled corpus jsonl")->required();
  sub->add_option("--label-field", opts->label_field, "weak|gold");
  sub->add_option("--in", opts->in, "token corpus (cnn; defaults to --labels)");
  sub->add_option("--embeddings", opts->embeddings, "embeddings file (cnn)");
  sub->add_option("--out", opts->out, "model artifact output")->required();
  sub->add_option("--seed", opts->seed, "training seed");
  sub->add_option("--lambda", opts->svm.lambda, "svm l2 strength");
  sub->add_option("--epochs", opts->epochs, "svm/cnn training epochs");
  sub->add_option("--trees", opts->rf.n_trees, "rf tree count");
  sub->add_option("--max-depth", opts->rf.max_depth, "rf depth limit");
  sub->add_option("--min-leaf", opts->rf.min_leaf, "rf min leaf size");
  sub->add_option("--mtry", opts->rf.features_per_split,
                  "rf features per split (0 = sqrt)");
  sub->add_option("--bootstrap", opts->rf.bootstrap, "rf bootstrap flag");
  sub->add_option("--max-len", opts->cnn.max_len, "cnn max tokens");
  sub->add_option("--lr", opts->cnn.lr, "cnn learning rate");
  sub->add_option("--batch", opts->cnn.batch, "cnn batch size");
  sub->add_flag("--finetune", opts->cnn.finetune_embeddings,
                "fine-tune cnn embeddings");

  sub->callback([opts, argc, argv]() {
    const std::string& kind = opts->model;
    if (kind != "svm" && kind != "rf" && kind != "cnn")
      throw std::runtime_error("--model must be svm, rf or cnn");
    if (kind == "cnn" && opts->featurizer != "tokens")
      throw std::runtime_error(
          "artifact-kind mismatch: the cnn consumes token documents "
          "(--featurizer tokens), not \"" + opts->featurizer + "\" vectors");
    if (kind != "cnn" && opts->featurizer == "tokens")
      throw std::runtime_error("artifact-kind mismatch: " + kind +
                               " needs vector features (mean|tfidf|topic)");

    ManifestWriter mw("train", argc, argv);
    mw.input(opts->labels);
    mw.seed("train", opts->seed);
    mw.config("model", kind);
    mw.config("featurizer", opts->featurizer);
    mw.config("label_field", opts->label_field);

    auto records = load_corpus_json(opts->labels);
    std::map<std::string, std::string> label_by_id;
    for (const auto& j : records) {
      std::string id = j.at("id").get<std::string>();
      label_by_id[id] = label_field_of(j, opts->label_field, id);
    }

    ModelArtifact artifact;
    if (kind == "cnn") {
      if (opts->embeddings.empty())
        throw std::runtime_error("--model cnn needs --embeddings");
      mw.input(opts->embeddings);
      std::string corpus_path = opts->in.empty() ? opts->labels : opts->in;
      auto docs = load_corpus(corpus_path);
      std::vector<std::vector<std::string>> token_docs;
      std::vector<std::string> labels;
      for (const auto& d : docs) {
        auto it = label_by_id.find(d.id);
        if (it == label_by_id.end())
          throw std::runtime_error("no label for document \"" + d.id + "\"");
        token_docs.push_back(tokenize_document(d).tokens);
        labels.push_back(it->second);
      }
      auto table = load_embeddings(opts->embeddings);
      CnnHyper hy = opts->cnn;
      hy.seed = opts->seed;
      if (opts->epochs > 0) hy.epochs = opts->epochs;
      artifact = train_cnn(token_docs, labels, table, hy);
    } else {
      if (opts->features.empty())
        throw std::runtime_error("--model " + kind + " needs --features");
      mw.input(opts->features);
      auto feats = load_features(opts->features);
      std::vector<FeatureVector> xs;
      std::vector<std::string> labels;
      for (auto& f : feats) {
        auto it = label_by_id.find(f.id);
        if (it == label_by_id.end())
          throw std::runtime_error("no label for document \"" + f.id + "\"");
        xs.push_back(std::move(f.fv));
        labels.push_back(it->second);
      }
      if (kind == "svm") {
        SvmHyper hy = opts->svm;
        hy.seed = opts->seed;
        if (opts->epochs > 0) hy.epochs = opts->epochs;
        artifact = train_svm(xs, labels, hy);
      } else {
        RfHyper hy = opts->rf;
        hy.seed = opts->seed;
        artifact = train_rf(xs, labels, hy);
      }
    }
    save_model(artifact, opts->out);
    mw.output(opts->out);
    mw.write(manifest_path_for(opts->out));
    std::cout << "trained " << kind << " model -> " << opts->out << "\n";
  });
  return 0;
}

// ----------------------------------------------------------------- eval

int cmd_eval(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("eval", "score predictions against gold");
  struct EvalOpts {
    std::string model, features, in, preds, pred_field;
    std::string gold, gold_field = "gold", positive, out, preds_out;
  };
  auto opts = std::make_shared<EvalOpts>();
  sub->add_option("--model", opts->model, "model artifact");
  sub->add_option("--features", opts->features, "features jsonl (svm/rf)");
  sub->add_option("--in", opts->in, "token corpus (cnn)");
  sub->add_option("--preds", opts->preds, "predictions jsonl to score");
  sub->add_option("--pred-field", opts->pred_field,
                  "score a label field of the gold corpus (e.g. weak)");
  sub->add_option("--gold", opts->gold, "gold corpus jsonl")->required();
  sub->add_option("--gold-field", opts->gold_field, "gold label field");
  sub->add_option("--positive", opts->positive, "positive class")->required();
  sub->add_option("--out", opts->out, "report output jsonl");
  sub->add_option("--preds-out", opts->preds_out, "write predictions here");

  sub->callback([opts, argc, argv]() {
    ManifestWriter mw("eval", argc, argv);
    mw.input(opts->gold);
    auto records = load_corpus_json(opts->gold);
    std::vector<std::string> ids, golds;
    for (const auto& j : records) {
      std::string id = j.at("id").get<std::string>();
      ids.push_back(id);
      golds.push_back(label_field_of(j, opts->gold_field, id));
    }

    std::vector<std::string> preds;
    std::vector<PredRecord> pred_records;
    std::string method;
    if (!opts->model.empty()) {
      mw.input(opts->model);
      ModelArtifact artifact = load_model(opts->model);
      method = model_kind(artifact);
      if (auto* cnn = std::get_if<CnnModel>(&artifact)) {
        std::string corpus_path = opts->in.empty() ? opts->gold : opts->in;
        auto docs = load_corpus(corpus_path);
        if (docs.size() != ids.size())
          throw std::runtime_error("--in and --gold sizes differ");
        for (const auto& d : docs) {
          auto p = cnn_predict(*cnn, tokenize_document(d).tokens);
          pred_records.push_back(
              {d.id, p.label, {{p.classes[0], p.scores[0]},
                               {p.classes[1], p.scores[1]}}});
          preds.push_back(p.label);
        }
      } else {
        if (opts->features.empty())
          throw std::runtime_error("vector models need --features");
        mw.input(opts->features);
        auto feats = load_features(opts->features);
        if (feats.size() != ids.size())
          throw std::runtime_error("--features and --gold sizes differ");
        for (std::size_t i = 0; i < feats.size(); ++i) {
          Prediction p = std::holds_alternative<SvmModel>(artifact)
                             ? svm_predict(std::get<SvmModel>(artifact),
                                           feats[i].fv)
                             : rf_predict(std::get<RfModel>(artifact),
                                          feats[i].fv);
          pred_records.push_back(
              {feats[i].id, p.label, {{p.classes[0], p.scores[0]},
                                      {p.classes[1], p.scores[1]}}});
          preds.push_back(p.label);
        }
      }
    } else if (!opts->preds.empty()) {
      mw.input(opts->preds);
      method = "preds";
      auto loaded = load_preds(opts->preds);
      if (loaded.size() != ids.size())
        throw std::runtime_error("--preds and --gold sizes differ");
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        if (loaded[i].id != ids[i])
          throw std::runtime_error("prediction id \"" + loaded[i].id +
                                   "\" does not match gold id \"" + ids[i] +
                                   "\"");
        preds.push_back(loaded[i].label);
      }
      pred_records = std::move(loaded);
    } else if (!opts->pred_field.empty()) {
      method = opts->pred_field;
      for (const auto& j : records) {
        std::string id = j.at("id").get<std::string>();
        preds.push_back(label_field_of(j, opts->pred_field, id));
      }
    } else {
      throw std::runtime_error("need one of --model, --preds, --pred-field");
    }

    EvalReport report;
    report.counts = confusion(preds, golds, opts->positive);
    report.metrics = prf(report.counts);
    report.metadata["method"] = method;
    report.metadata["positive"] = opts->positive;
    report.metadata["n"] = std::to_string(golds.size());

    std::cout << "precision=" << metric_str(report.metrics.precision)
              << " recall=" << metric_str(report.metrics.recall)
              << " f1=" << metric_str(report.metrics.f1) << " (tp="
              << report.counts.tp << " fp=" << report.counts.fp
              << " fn=" << report.counts.fn << " tn=" << report.counts.tn
              << ")\n";
    if (!opts->preds_out.empty() && !pred_records.empty()) {
      write_preds(pred_records, opts->preds_out);
      mw.output(opts->preds_out);
    }
    if (!opts->out.empty()) {
      write_reports({report}, opts->out);
      mw.output(opts->out);
      mw.write(manifest_path_for(opts->out));
    }
  });
  return 0;
}

// ---------------------------------------------------------------- curve

int cmd_curve(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("curve", "learning curve over training sizes");
  struct CurveOpts {
    std::string config, out, sizes;
    std::uint64_t seed = 0;
    bool have_seed = false;
  };
  auto opts = std::make_shared<CurveOpts>();
  sub->add_option("--config", opts->config, "experiment config json")
      ->required();
  sub->add_option("--out", opts->out, "output directory")->required();
  sub->add_option("--sizes", opts->sizes,
                  "comma-separated training sizes "
                  "(default 1000,2500,5000,10000,20000)");
  auto* seed_opt = sub->add_option("--seed", opts->seed, "override config seed");

  sub->callback([opts, seed_opt, argc, argv]() {
    ManifestWriter mw("curve", argc, argv);
    mw.input(opts->config);
    ExperimentConfig cfg = load_experiment_config(opts->config);
    if (seed_opt->count() > 0) cfg.seed = opts->seed;
    mw.seed("master", cfg.seed);

    std::vector<std::size_t> sizes;
    if (opts->sizes.empty()) {
      sizes = default_curve_sizes();
    } else {
      std::istringstream in(opts->sizes);
      std::string item;
      while (std::getline(in, item, ','))
        sizes.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    json jsizes = json::array();
    for (auto s : sizes) jsizes.push_back(s);
    mw.config("sizes", jsizes);

    fs::create_directories(opts->out);
    CurveReport curve = run_curve(cfg, sizes);
    std::string csv = opts->out + "/curve.csv";
    write_curve_csv(curve, csv);
    mw.output(csv);
    std::vector<EvalReport> flat;
    for (const auto& p : curve.points)
      for (const auto& [method, r] : p.by_method) flat.push_back(r);
    std::string reports = opts->out + "/reports.jsonl";
    write_reports(flat, reports);
    mw.output(reports);
    mw.write(opts->out + "/manifest.json");
    std::cout << "curve over " << sizes.size() << " sizes -> " << csv << "\n";
  });
  return 0;
}

// ----------------------------------------------------------------- diff

int cmd_diff(CLI::App& app, int argc, char** argv) {
  auto* sub = app.add_subcommand("diff", "list disagreements between two "
                                         "prediction sets");
  struct DiffOpts {
    std::string a, b, gold, gold_field = "gold", rules, out;
  };
  auto opts = std::make_shared<DiffOpts>();
  sub->add_option("--a", opts->a, "predictions jsonl A")->required();
  sub->add_option("--b", opts->b, "predictions jsonl B")->required();
  sub->add_option("--gold", opts->gold, "gold corpus jsonl")->required();
  sub->add_option("--gold-field", opts->gold_field, "gold label field");
  sub->add_option("--rules", opts->rules, "rule set for trace annotation");
  sub->add_option("--out", opts->out, "disagreement listing output");

  sub->callback([opts, argc, argv]() {
    auto records = load_corpus_json(opts->gold);
    std::vector<Document> corpus;
    std::vector<std::string> golds;
    for (const auto& j : records) {
      Document d;
      d.id = j.at("id").get<std::string>();
      d.text = j.value("text", std::string{});
      corpus.push_back(d);
      golds.push_back(label_field_of(j, opts->gold_field, d.id));
    }
    auto pa = load_preds(opts->a);
    auto pb = load_preds(opts->b);
    if (pa.size() != corpus.size() || pb.size() != corpus.size())
      throw std::runtime_error("prediction/gold sizes differ");
    std::vector<std::string> la, lb;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (pa[i].id != corpus[i].id || pb[i].id != corpus[i].id)
        throw std::runtime_error("prediction ids do not line up with gold");
      la.push_back(pa[i].label);
      lb.push_back(pb[i].label);
    }

    std::vector<WeakLabel> weak;
    const std::vector<WeakLabel>* weak_ptr = nullptr;
    if (!opts->rules.empty()) {
      RuleSet rs = load_ruleset(opts->rules);
      weak = label_corpus(rs, corpus);
      weak_ptr = &weak;
    }

    auto diffs = diff_cases(la, lb, golds, corpus, weak_ptr);
    auto mc = mcnemar(la, lb, golds);
    std::cout << "disagreements=" << diffs.size() << " b=" << mc.b
              << " c=" << mc.c << " p=" << format_double(mc.p_value) << "\n";

    if (!opts->out.empty()) {
      ManifestWriter mw("diff", argc, argv);
      mw.input(opts->a);
      mw.input(opts->b);
      mw.input(opts->gold);
      std::ofstream out(opts->out);
      if (!out) throw std::runtime_error("cannot write: " + opts->out);
      for (const auto& d : diffs) {
        json j;
        j["id"] = d.doc_id;
        j["pred_a"] = d.pred_a;
        j["pred_b"] = d.pred_b;
        j["gold"] = d.gold;
        json trace = json::array();
        for (const auto& t : d.rule_trace)
          trace.push_back({{"layer", t.layer},
                           {"pattern", t.pattern},
                           {"begin", t.begin},
                           {"end", t.end}});
        j["trace"] = trace;
        out << j.dump() << "\n";
      }
      mw.output(opts->out);
      mw.write(manifest_path_for(opts->out));
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dswe: distant-supervision text classification toolkit"};
  app.require_subcommand(1);
  cmd_synth(app, argc, argv);
  cmd_label(app, argc, argv);
  cmd_embed(app, argc, argv);
  cmd_neighbors(app, argc, argv);
  cmd_featurize(app, argc, argv);
  cmd_train(app, argc, argv);
  cmd_eval(app, argc, argv);
  cmd_curve(app, argc, argv);
  cmd_diff(app, argc, argv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
