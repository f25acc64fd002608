#include "dswe/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dswe/util.hpp"

namespace dswe {

void CnnModel::rebuild_index() {
  vindex.clear();
  vindex.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) vindex[vocab[i]] = i;
}

namespace {

constexpr std::ptrdiff_t kPad = -1;

std::vector<std::ptrdiff_t> lookup(const CnnModel& m,
                                   const std::vector<std::string>& tokens) {
  std::vector<std::ptrdiff_t> idx;
  const std::size_t n = std::min(tokens.size(), m.hyper.max_len);
  idx.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = m.vindex.find(tokens[i]);
    idx.push_back(it == m.vindex.end() ? kPad : static_cast<std::ptrdiff_t>(it->second));
  }
  return idx;
}

struct Cache {
  std::vector<std::ptrdiff_t> idx;
  // per width: pre-activation of the max position, its position, and the
  // pooled (post-ReLU) value, per filter
  std::vector<std::vector<double>> max_pre;
  std::vector<std::vector<std::ptrdiff_t>> max_pos;  // -2 = all-pad position
  std::vector<double> pooled;
  std::vector<double> probs;
};

void forward(const CnnModel& m, const std::vector<std::ptrdiff_t>& idx,
             Cache& c) {
  const std::size_t L = idx.size();
  const std::size_t F = m.filters_per_width;
  c.idx = idx;
  c.max_pre.assign(m.widths.size(), {});
  c.max_pos.assign(m.widths.size(), {});
  c.pooled.assign(m.total_filters(), 0.0);

  for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
    const std::size_t w = m.widths[wi];
    if (m.hyper.max_len < w)
      throw std::runtime_error("max_len smaller than filter width");
    const std::size_t total_pos = m.hyper.max_len - w + 1;
    const std::size_t explicit_pos = std::min(L, total_pos);
    const bool has_pad_pos = total_pos > L;
    auto& pre = c.max_pre[wi];
    auto& pos = c.max_pos[wi];
    pre.assign(F, 0.0);
    pos.assign(F, -2);

    for (std::size_t f = 0; f < F; ++f) {
      const double* wf = m.conv_w[wi].data() + f * w * m.dim;
      double best = -1e300;
      std::ptrdiff_t best_p = -2;
      for (std::size_t p = 0; p < explicit_pos; ++p) {
        double a = m.conv_b[wi][f];
        for (std::size_t i = 0; i < w && p + i < L; ++i) {
          if (idx[p + i] == kPad) continue;
          const double* e = m.embed.data() +
                            static_cast<std::size_t>(idx[p + i]) * m.dim;
          const double* wrow = wf + i * m.dim;
          double acc = 0;
          for (std::size_t d = 0; d < m.dim; ++d) acc += wrow[d] * e[d];
          a += acc;
        }
        if (a > best) {
          best = a;
          best_p = static_cast<std::ptrdiff_t>(p);
        }
      }
      if (has_pad_pos || explicit_pos == 0) {
        double a = m.conv_b[wi][f];
        if (a > best) {
          best = a;
          best_p = -2;
        }
      }
      pre[f] = best;
      pos[f] = best_p;
      c.pooled[wi * F + f] = std::max(0.0, best);
    }
  }

  const std::size_t C = m.classes.size();
  c.probs.assign(C, 0.0);
  double zmax = -1e300;
  std::vector<double> z(C);
  for (std::size_t k = 0; k < C; ++k) {
    double s = m.dense_b[k];
    const double* dw = m.dense_w.data() + k * m.total_filters();
    for (std::size_t f = 0; f < m.total_filters(); ++f) s += dw[f] * c.pooled[f];
    z[k] = s;
    zmax = std::max(zmax, s);
  }
  double sum = 0;
  for (std::size_t k = 0; k < C; ++k) {
    c.probs[k] = std::exp(z[k] - zmax);
    sum += c.probs[k];
  }
  for (auto& p : c.probs) p /= sum;
}

struct Gradients {
  std::vector<std::vector<double>> conv_w, conv_b;
  std::vector<double> dense_w, dense_b;
  std::vector<double> embed;  // only used when finetuning

  void init(const CnnModel& m, bool with_embed) {
    conv_w.resize(m.widths.size());
    conv_b.resize(m.widths.size());
    for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
      conv_w[wi].assign(m.conv_w[wi].size(), 0.0);
      conv_b[wi].assign(m.conv_b[wi].size(), 0.0);
    }
    dense_w.assign(m.dense_w.size(), 0.0);
    dense_b.assign(m.dense_b.size(), 0.0);
    embed.assign(with_embed ? m.embed.size() : 0, 0.0);
  }
  void zero() {
    for (auto& v : conv_w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : conv_b) std::fill(v.begin(), v.end(), 0.0);
    std::fill(dense_w.begin(), dense_w.end(), 0.0);
    std::fill(dense_b.begin(), dense_b.end(), 0.0);
    std::fill(embed.begin(), embed.end(), 0.0);
  }
};

// accumulates dLoss/dtheta for one example into g
void backward(const CnnModel& m, const Cache& c, std::size_t label_idx,
              Gradients& g) {
  const std::size_t C = m.classes.size();
  const std::size_t F = m.filters_per_width;
  const std::size_t TF = m.total_filters();
  const std::size_t L = c.idx.size();

  std::vector<double> dz(c.probs);
  dz[label_idx] -= 1.0;

  std::vector<double> dpooled(TF, 0.0);
  for (std::size_t k = 0; k < C; ++k) {
    g.dense_b[k] += dz[k];
    const double* dw = m.dense_w.data() + k * TF;
    double* gw = g.dense_w.data() + k * TF;
    for (std::size_t f = 0; f < TF; ++f) {
      gw[f] += dz[k] * c.pooled[f];
      dpooled[f] += dz[k] * dw[f];
    }
  }

  for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
    const std::size_t w = m.widths[wi];
    for (std::size_t f = 0; f < F; ++f) {
      if (c.max_pre[wi][f] <= 0.0) continue;  // ReLU gate
      const double da = dpooled[wi * F + f];
      if (da == 0.0) continue;
      g.conv_b[wi][f] += da;
      const std::ptrdiff_t p = c.max_pos[wi][f];
      if (p < 0) continue;  // all-pad position: only the bias contributes
      double* gw = g.conv_w[wi].data() + f * w * m.dim;
      const double* wf = m.conv_w[wi].data() + f * w * m.dim;
      for (std::size_t i = 0; i < w && static_cast<std::size_t>(p) + i < L; ++i) {
        const std::ptrdiff_t row = c.idx[static_cast<std::size_t>(p) + i];
        if (row == kPad) continue;
        const double* e = m.embed.data() + static_cast<std::size_t>(row) * m.dim;
        double* gwrow = gw + i * m.dim;
        for (std::size_t d = 0; d < m.dim; ++d) gwrow[d] += da * e[d];
        if (!g.embed.empty()) {
          double* ge = g.embed.data() + static_cast<std::size_t>(row) * m.dim;
          const double* wrow = wf + i * m.dim;
          for (std::size_t d = 0; d < m.dim; ++d) ge[d] += da * wrow[d];
        }
      }
    }
  }
}

struct AdamState {
  std::vector<double> m, v;
  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
               AdamState& st, double lr, double t) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * grad[i];
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * grad[i] * grad[i];
    theta[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
  }
}

}  // namespace

CnnModel cnn_init(const EmbeddingTable& table,
                  const std::vector<std::string>& classes,
                  const CnnHyper& hyper) {
  if (classes.size() != 2)
    throw std::runtime_error("cnn supports binary tasks only");
  CnnModel m;
  m.dim = table.dim;
  m.classes = classes;
  m.vocab = table.vocab;
  m.embed = table.data;
  m.hyper = hyper;
  m.rebuild_index();
  const std::size_t maxw = *std::max_element(m.widths.begin(), m.widths.end());
  if (hyper.max_len < maxw)
    throw std::invalid_argument("max_len must be >= largest filter width");

  Rng rng(hyper.seed);
  m.conv_w.resize(m.widths.size());
  m.conv_b.resize(m.widths.size());
  for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
    const std::size_t fan_in = m.widths[wi] * m.dim;
    const double r = std::sqrt(6.0 / (static_cast<double>(fan_in) + 1.0));
    m.conv_w[wi].resize(m.filters_per_width * fan_in);
    for (auto& x : m.conv_w[wi]) x = rng.range(-r, r);
    m.conv_b[wi].assign(m.filters_per_width, 0.0);
  }
  const std::size_t TF = m.total_filters();
  const double rd = std::sqrt(6.0 / (static_cast<double>(TF) + 2.0));
  m.dense_w.resize(m.classes.size() * TF);
  for (auto& x : m.dense_w) x = rng.range(-rd, rd);
  m.dense_b.assign(m.classes.size(), 0.0);
  return m;
}

double cnn_loss(const CnnModel& model, const std::vector<std::string>& tokens,
                const std::string& label) {
  auto it = std::find(model.classes.begin(), model.classes.end(), label);
  if (it == model.classes.end())
    throw std::runtime_error("label \"" + label + "\" not among model classes");
  Cache c;
  forward(model, lookup(model, tokens), c);
  const double p = c.probs[static_cast<std::size_t>(it - model.classes.begin())];
  return -std::log(std::max(p, 1e-300));
}

Prediction cnn_predict(const CnnModel& model,
                       const std::vector<std::string>& tokens) {
  Cache c;
  forward(model, lookup(model, tokens), c);
  Prediction p;
  p.classes = model.classes;
  p.scores = c.probs;
  p.label = model.classes[argmax_class(p.scores)];
  return p;
}

CnnModel train_cnn(const std::vector<std::vector<std::string>>& docs,
                   const std::vector<std::string>& labels,
                   const EmbeddingTable& table, const CnnHyper& hyper) {
  if (docs.empty() || docs.size() != labels.size())
    throw std::invalid_argument("train_cnn: docs/labels size mismatch");
  bool any_tokens = false;
  for (const auto& d : docs) any_tokens = any_tokens || !d.empty();
  if (!any_tokens)
    throw std::runtime_error("train_cnn: every document is empty");

  CnnModel m = cnn_init(table, binary_classes(labels), hyper);
  std::vector<std::size_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[i] = labels[i] == m.classes[1] ? 1 : 0;
  std::vector<std::vector<std::ptrdiff_t>> idx(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) idx[i] = lookup(m, docs[i]);

  const bool tune = hyper.finetune_embeddings;
  Gradients g;
  g.init(m, tune);
  AdamState st_dense_w, st_dense_b, st_embed;
  std::vector<AdamState> st_conv_w(m.widths.size()), st_conv_b(m.widths.size());
  for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
    st_conv_w[wi].init(m.conv_w[wi].size());
    st_conv_b[wi].init(m.conv_b[wi].size());
  }
  st_dense_w.init(m.dense_w.size());
  st_dense_b.init(m.dense_b.size());
  if (tune) st_embed.init(m.embed.size());

  Rng rng(hyper.seed + 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t batch = std::max<std::size_t>(1, hyper.batch);
  Cache cache;
  double t = 0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      g.zero();
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t i = order[bi];
        forward(m, idx[i], cache);
        backward(m, cache, y[i], g);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (auto& gv : g.conv_w)
        for (auto& x : gv) x *= inv;
      for (auto& gv : g.conv_b)
        for (auto& x : gv) x *= inv;
      for (auto& x : g.dense_w) x *= inv;
      for (auto& x : g.dense_b) x *= inv;
      for (auto& x : g.embed) x *= inv;

      t += 1.0;
      for (std::size_t wi = 0; wi < m.widths.size(); ++wi) {
        adam_step(m.conv_w[wi], g.conv_w[wi], st_conv_w[wi], hyper.lr, t);
        adam_step(m.conv_b[wi], g.conv_b[wi], st_conv_b[wi], hyper.lr, t);
      }
      adam_step(m.dense_w, g.dense_w, st_dense_w, hyper.lr, t);
      adam_step(m.dense_b, g.dense_b, st_dense_b, hyper.lr, t);
      if (tune) adam_step(m.embed, g.embed, st_embed, hyper.lr, t);
    }
    double ce = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      forward(m, idx[i], cache);
      ce -= std::log(std::max(cache.probs[y[i]], 1e-300));
    }
    m.epoch_loss.push_back(ce / static_cast<double>(docs.size()));
  }
  return m;
}

double cnn_grad_check(const CnnModel& model,
                      const std::vector<std::string>& tokens,
                      const std::string& label, const GradCheckOptions& opts) {
  auto it = std::find(model.classes.begin(), model.classes.end(), label);
  if (it == model.classes.end())
    throw std::runtime_error("label \"" + label + "\" not among model classes");
  const std::size_t label_idx =
      static_cast<std::size_t>(it - model.classes.begin());
  const bool tune = model.hyper.finetune_embeddings;

  CnnModel work = model;
  Cache cache;
  forward(work, lookup(work, tokens), cache);
  Gradients g;
  g.init(work, tune);
  backward(work, cache, label_idx, g);
  if (opts.corrupt_dense_bias)
    for (auto& x : g.dense_b) x += 0.5;

  // parameter address table: (vector, offset, analytic grad)
  struct Slot {
    std::vector<double>* theta;
    std::size_t i;
    double analytic;
  };
  std::vector<Slot> slots;
  for (std::size_t wi = 0; wi < work.widths.size(); ++wi) {
    for (std::size_t i = 0; i < work.conv_w[wi].size(); ++i)
      slots.push_back({&work.conv_w[wi], i, g.conv_w[wi][i]});
    for (std::size_t i = 0; i < work.conv_b[wi].size(); ++i)
      slots.push_back({&work.conv_b[wi], i, g.conv_b[wi][i]});
  }
  for (std::size_t i = 0; i < work.dense_w.size(); ++i)
    slots.push_back({&work.dense_w, i, g.dense_w[i]});
  for (std::size_t i = 0; i < work.dense_b.size(); ++i)
    slots.push_back({&work.dense_b, i, g.dense_b[i]});
  if (tune)
    for (std::size_t i = 0; i < work.embed.size(); ++i)
      slots.push_back({&work.embed, i, g.embed[i]});

  if (opts.max_params > 0 && slots.size() > opts.max_params) {
    const std::size_t keep = std::max<std::size_t>(opts.max_params, 200);
    Rng rng(opts.seed);
    for (std::size_t i = 0; i < keep; ++i) {
      std::size_t j = i + rng.below(slots.size() - i);
      std::swap(slots[i], slots[j]);
    }
    slots.resize(keep);
  }

  double max_err = 0.0;
  for (const auto& s : slots) {
    const double orig = (*s.theta)[s.i];
    (*s.theta)[s.i] = orig + opts.h;
    const double lp = cnn_loss(work, tokens, label);
    (*s.theta)[s.i] = orig - opts.h;
    const double lm = cnn_loss(work, tokens, label);
    (*s.theta)[s.i] = orig;
    const double numeric = (lp - lm) / (2.0 * opts.h);
    const double denom = std::abs(s.analytic) + std::abs(numeric);
    if (denom < 1e-12) continue;
    max_err = std::max(max_err,
                       std::abs(s.analytic - numeric) / std::max(denom, 1e-8));
  }
  return max_err;
}

}  // namespace dswe
