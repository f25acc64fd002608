#include "dswe/model_io.hpp"

#include <fstream>
#include <sstream>

#include "dswe/util.hpp"

namespace dswe {

namespace {

void expect(std::istream& in, const std::string& tok, const std::string& path) {
  std::string got;
  if (!(in >> got) || got != tok)
    throw std::runtime_error(path + ": expected \"" + tok + "\", got \"" +
                             got + "\"");
}

template <typename T>
T read_val(std::istream& in, const std::string& key, const std::string& path) {
  expect(in, key, path);
  T v{};
  if (!(in >> v))
    throw std::runtime_error(path + ": bad value for " + key);
  return v;
}

void write_svm(std::ostream& out, const SvmModel& m) {
  out << "DSWE-MODEL v1 svm\n";
  out << "classes " << m.classes[0] << " " << m.classes[1] << "\n";
  out << "hyper lambda " << format_double(m.hyper.lambda) << " epochs "
      << m.hyper.epochs << " seed " << m.hyper.seed << "\n";
  out << "dim " << m.weights.size() << "\n";
  out << "bias " << format_double(m.bias) << "\n";
  out << "w";
  for (double w : m.weights) out << " " << format_double(w);
  out << "\n";
}

SvmModel read_svm(std::istream& in, const std::string& path) {
  SvmModel m;
  m.classes.resize(2);
  expect(in, "classes", path);
  in >> m.classes[0] >> m.classes[1];
  expect(in, "hyper", path);
  m.hyper.lambda = read_val<double>(in, "lambda", path);
  m.hyper.epochs = read_val<std::size_t>(in, "epochs", path);
  m.hyper.seed = read_val<std::uint64_t>(in, "seed", path);
  auto dim = read_val<std::size_t>(in, "dim", path);
  m.bias = read_val<double>(in, "bias", path);
  expect(in, "w", path);
  m.weights.resize(dim);
  for (auto& w : m.weights)
    if (!(in >> w)) throw std::runtime_error(path + ": truncated weights");
  return m;
}

void write_rf(std::ostream& out, const RfModel& m) {
  out << "DSWE-MODEL v1 rf\n";
  out << "classes " << m.classes[0] << " " << m.classes[1] << "\n";
  out << "hyper n_trees " << m.hyper.n_trees << " max_depth "
      << m.hyper.max_depth << " min_leaf " << m.hyper.min_leaf << " mtry "
      << m.hyper.features_per_split << " bootstrap "
      << (m.hyper.bootstrap ? 1 : 0) << " seed " << m.hyper.seed << "\n";
  out << "dim " << m.dim << "\n";
  for (const auto& tree : m.trees) {
    out << "tree " << tree.nodes.size() << "\n";
    for (const auto& n : tree.nodes) {
      if (n.left >= 0) {
        out << "I " << n.left << " " << n.right << " " << n.feature << " "
            << format_double(n.threshold) << "\n";
      } else {
        out << "L";
        for (std::size_t c : n.counts) out << " " << c;
        out << "\n";
      }
    }
  }
}

RfModel read_rf(std::istream& in, const std::string& path) {
  RfModel m;
  m.classes.resize(2);
  expect(in, "classes", path);
  in >> m.classes[0] >> m.classes[1];
  expect(in, "hyper", path);
  m.hyper.n_trees = read_val<std::size_t>(in, "n_trees", path);
  m.hyper.max_depth = read_val<std::size_t>(in, "max_depth", path);
  m.hyper.min_leaf = read_val<std::size_t>(in, "min_leaf", path);
  m.hyper.features_per_split = read_val<std::size_t>(in, "mtry", path);
  m.hyper.bootstrap = read_val<int>(in, "bootstrap", path) != 0;
  m.hyper.seed = read_val<std::uint64_t>(in, "seed", path);
  m.dim = read_val<std::size_t>(in, "dim", path);
  for (std::size_t t = 0; t < m.hyper.n_trees; ++t) {
    auto n_nodes = read_val<std::size_t>(in, "tree", path);
    DecisionTree tree;
    tree.nodes.resize(n_nodes);
    for (auto& n : tree.nodes) {
      std::string tag;
      if (!(in >> tag)) throw std::runtime_error(path + ": truncated tree");
      if (tag == "I") {
        in >> n.left >> n.right >> n.feature >> n.threshold;
      } else if (tag == "L") {
        n.counts.resize(2);
        in >> n.counts[0] >> n.counts[1];
      } else {
        throw std::runtime_error(path + ": bad node tag \"" + tag + "\"");
      }
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

void write_cnn(std::ostream& out, const CnnModel& m) {
  out << "DSWE-MODEL v1 cnn\n";
  out << "classes " << m.classes[0] << " " << m.classes[1] << "\n";
  out << "hyper max_len " << m.hyper.max_len << " lr "
      << format_double(m.hyper.lr) << " batch " << m.hyper.batch << " epochs "
      << m.hyper.epochs << " seed " << m.hyper.seed << " finetune "
      << (m.hyper.finetune_embeddings ? 1 : 0) << "\n";
  out << "arch dim " << m.dim << " filters " << m.filters_per_width
      << " widths " << m.widths.size();
  for (std::size_t w : m.widths) out << " " << w;
  out << "\n";
  out << "vocab " << m.vocab.size() << "\n";
  for (std::size_t i = 0; i < m.vocab.size(); ++i) {
    out << m.vocab[i];
    for (std::size_t d = 0; d < m.dim; ++d)
      out << " " << format_double(m.embed[i * m.dim + d]);
    out << "\n";
  }
  for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
    out << "convw " << wi << "\n";
    for (std::size_t f = 0; f < m.filters_per_width; ++f) {
      const std::size_t row = m.widths[wi] * m.dim;
      for (std::size_t i = 0; i < row; ++i)
        out << (i ? " " : "") << format_double(m.conv_w[wi][f * row + i]);
      out << "\n";
    }
    out << "convb " << wi;
    for (double b : m.conv_b[wi]) out << " " << format_double(b);
    out << "\n";
  }
  out << "densew";
  for (double w : m.dense_w) out << " " << format_double(w);
  out << "\n";
  out << "denseb";
  for (double b : m.dense_b) out << " " << format_double(b);
  out << "\n";
}

CnnModel read_cnn(std::istream& in, const std::string& path) {
  CnnModel m;
  m.classes.resize(2);
  expect(in, "classes", path);
  in >> m.classes[0] >> m.classes[1];
  expect(in, "hyper", path);
  m.hyper.max_len = read_val<std::size_t>(in, "max_len", path);
  m.hyper.lr = read_val<double>(in, "lr", path);
  m.hyper.batch = read_val<std::size_t>(in, "batch", path);
  m.hyper.epochs = read_val<std::size_t>(in, "epochs", path);
  m.hyper.seed = read_val<std::uint64_t>(in, "seed", path);
  m.hyper.finetune_embeddings = read_val<int>(in, "finetune", path) != 0;
  expect(in, "arch", path);
  m.dim = read_val<std::size_t>(in, "dim", path);
  m.filters_per_width = read_val<std::size_t>(in, "filters", path);
  auto n_widths = read_val<std::size_t>(in, "widths", path);
  m.widths.resize(n_widths);
  for (auto& w : m.widths)
    if (!(in >> w)) throw std::runtime_error(path + ": truncated widths");
  auto V = read_val<std::size_t>(in, "vocab", path);
  m.vocab.resize(V);
  m.embed.resize(V * m.dim);
  for (std::size_t i = 0; i < V; ++i) {
    if (!(in >> m.vocab[i]))
      throw std::runtime_error(path + ": truncated vocab");
    for (std::size_t d = 0; d < m.dim; ++d)
      if (!(in >> m.embed[i * m.dim + d]))
        throw std::runtime_error(path + ": truncated embedding row");
  }
  m.rebuild_index();
  m.conv_w.resize(n_widths);
  m.conv_b.resize(n_widths);
  for (std::size_t wi = 0; wi < n_widths; ++wi) {
    auto tag_wi = read_val<std::size_t>(in, "convw", path);
    if (tag_wi != wi) throw std::runtime_error(path + ": conv blocks out of order");
    m.conv_w[wi].resize(m.filters_per_width * m.widths[wi] * m.dim);
    for (auto& x : m.conv_w[wi])
      if (!(in >> x)) throw std::runtime_error(path + ": truncated conv weights");
    tag_wi = read_val<std::size_t>(in, "convb", path);
    if (tag_wi != wi) throw std::runtime_error(path + ": conv blocks out of order");
    m.conv_b[wi].resize(m.filters_per_width);
    for (auto& x : m.conv_b[wi])
      if (!(in >> x)) throw std::runtime_error(path + ": truncated conv bias");
  }
  expect(in, "densew", path);
  m.dense_w.resize(m.classes.size() * m.total_filters());
  for (auto& x : m.dense_w)
    if (!(in >> x)) throw std::runtime_error(path + ": truncated dense weights");
  expect(in, "denseb", path);
  m.dense_b.resize(m.classes.size());
  for (auto& x : m.dense_b)
    if (!(in >> x)) throw std::runtime_error(path + ": truncated dense bias");
  return m;
}

}  // namespace

std::string model_kind(const ModelArtifact& model) {
  if (std::holds_alternative<SvmModel>(model)) return "svm";
  if (std::holds_alternative<RfModel>(model)) return "rf";
  return "cnn";
}

void save_model(const ModelArtifact& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  if (auto* svm = std::get_if<SvmModel>(&model))
    write_svm(out, *svm);
  else if (auto* rf = std::get_if<RfModel>(&model))
    write_rf(out, *rf);
  else
    write_cnn(out, std::get<CnnModel>(model));
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string magic, version, kind;
  if (!(in >> magic >> version >> kind) || magic != "DSWE-MODEL" ||
      version != "v1")
    throw std::runtime_error(path + ": not a DSWE-MODEL v1 artifact");
  if (kind == "svm") return read_svm(in, path);
  if (kind == "rf") return read_rf(in, path);
  if (kind == "cnn") return read_cnn(in, path);
  throw std::runtime_error(path + ": unknown model kind \"" + kind + "\"");
}

}  // namespace dswe
