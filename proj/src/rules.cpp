#include "dswe/rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "dswe/util.hpp"

namespace dswe {

namespace {

[[noreturn]] void parse_fail(const std::string& name, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::regex compile_pattern(const std::string& source, BoundaryMode mode,
                           const std::string& name, std::size_t line) {
  std::string wrapped = mode == BoundaryMode::WholeWord
                            ? "\\b(?:" + source + ")\\b"
                            : "\\b(?:" + source + ")";
  try {
    return std::regex(wrapped,
                      std::regex::ECMAScript | std::regex::icase |
                          std::regex::optimize);
  } catch (const std::regex_error& e) {
    parse_fail(name, line, "invalid regex \"" + source + "\": " + e.what());
  }
}

}  // namespace

RuleSet parse_ruleset(const std::string& config_text, const std::string& name) {
  RuleSet rs;
  std::vector<ClassLabel> declared;
  bool have_default = false, have_labels = false;
  std::vector<std::pair<std::string, std::size_t>> pending;  // source, line
  std::vector<std::pair<std::string, std::size_t>> pending_a, pending_b;
  bool in_any = false, in_cooccur = false;
  std::size_t layer_line = 0;

  auto note_label = [&](const ClassLabel& l, std::size_t line) {
    if (have_labels &&
        std::find(declared.begin(), declared.end(), l) == declared.end())
      parse_fail(name, line, "undeclared label \"" + l + "\"");
    if (std::find(rs.labels.begin(), rs.labels.end(), l) == rs.labels.end())
      rs.labels.push_back(l);
  };
  auto flush_layer = [&]() {
    if (!in_any && !in_cooccur) return;
    RuleLayer& layer = rs.layers.back();
    if (in_any) {
      if (pending.empty())
        parse_fail(name, layer_line, "layer has no pattern lines");
      for (auto& [src, ln] : pending)
        layer.patterns.push_back({src, compile_pattern(src, rs.boundary_mode,
                                                       name, ln)});
    } else {
      if (pending_a.empty() || pending_b.empty())
        parse_fail(name, layer_line, "cooccur layer needs seta and setb lines");
      for (auto& [src, ln] : pending_a)
        layer.set_a.push_back({src, compile_pattern(src, rs.boundary_mode,
                                                    name, ln)});
      for (auto& [src, ln] : pending_b)
        layer.set_b.push_back({src, compile_pattern(src, rs.boundary_mode,
                                                    name, ln)});
    }
    pending.clear();
    pending_a.clear();
    pending_b.clear();
    in_any = in_cooccur = false;
  };

  std::istringstream in(config_text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = strip(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string directive;
    ls >> directive;
    std::string rest = strip(line.substr(directive.size()));

    if (directive == "task") {
      flush_layer();
      if (rest.empty()) parse_fail(name, lineno, "task needs a name");
      rs.task = rest;
    } else if (directive == "labels") {
      flush_layer();
      declared = split_ws(rest);
      if (declared.empty()) parse_fail(name, lineno, "labels needs names");
      have_labels = true;
      for (const auto& l : declared) note_label(l, lineno);
    } else if (directive == "default") {
      flush_layer();
      if (rest.empty()) parse_fail(name, lineno, "default needs a label");
      note_label(rest, lineno);
      rs.default_label = rest;
      have_default = true;
    } else if (directive == "boundary") {
      flush_layer();
      if (!rs.layers.empty())
        parse_fail(name, lineno, "boundary must precede all layers");
      if (rest == "whole-word")
        rs.boundary_mode = BoundaryMode::WholeWord;
      else if (rest == "prefix")
        rs.boundary_mode = BoundaryMode::Prefix;
      else
        parse_fail(name, lineno, "boundary must be whole-word or prefix");
    } else if (directive == "layer") {
      flush_layer();
      auto parts = split_ws(rest);
      if (!parts.empty() && parts.back().back() == ':')
        parts.back().pop_back();
      if (parts.size() == 2 && parts[0] == "any") {
        note_label(parts[1], lineno);
        rs.layers.push_back({RuleLayer::Kind::Any, parts[1], {}, {}, {}});
        in_any = true;
      } else if (parts.size() == 4 && parts[0] == "cooccur" &&
                 parts[2] == "scope" && parts[3] == "sentence") {
        note_label(parts[1], lineno);
        rs.layers.push_back({RuleLayer::Kind::Cooccur, parts[1], {}, {}, {}});
        in_cooccur = true;
      } else {
        parse_fail(name, lineno,
                   "expected: layer any <label>: | layer cooccur <label> "
                   "scope sentence:");
      }
      layer_line = lineno;
    } else if (directive == "pattern") {
      if (!in_any) parse_fail(name, lineno, "pattern outside a layer any");
      if (rest.empty()) parse_fail(name, lineno, "empty pattern");
      pending.emplace_back(rest, lineno);
    } else if (directive == "seta") {
      if (!in_cooccur) parse_fail(name, lineno, "seta outside a layer cooccur");
      if (rest.empty()) parse_fail(name, lineno, "empty seta pattern");
      pending_a.emplace_back(rest, lineno);
    } else if (directive == "setb") {
      if (!in_cooccur) parse_fail(name, lineno, "setb outside a layer cooccur");
      if (rest.empty()) parse_fail(name, lineno, "empty setb pattern");
      pending_b.emplace_back(rest, lineno);
    } else {
      parse_fail(name, lineno, "unknown directive \"" + directive + "\"");
    }
  }
  flush_layer();
  if (!have_default)
    throw std::runtime_error(name + ": missing default label");
  return rs;
}

RuleSet load_ruleset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ruleset(buf.str(), path);
}

std::string RuleSet::to_config() const {
  std::ostringstream out;
  out << "task " << task << "\n";
  out << "labels";
  for (const auto& l : labels) out << " " << l;
  out << "\n";
  out << "default " << default_label << "\n";
  out << "boundary "
      << (boundary_mode == BoundaryMode::WholeWord ? "whole-word" : "prefix")
      << "\n";
  for (const auto& layer : layers) {
    if (layer.kind == RuleLayer::Kind::Any) {
      out << "layer any " << layer.label << ":\n";
      for (const auto& p : layer.patterns) out << "  pattern " << p.source << "\n";
    } else {
      out << "layer cooccur " << layer.label << " scope sentence:\n";
      for (const auto& p : layer.set_a) out << "  seta " << p.source << "\n";
      for (const auto& p : layer.set_b) out << "  setb " << p.source << "\n";
    }
  }
  return out.str();
}

namespace {

bool first_match(const std::regex& re, const std::string& text,
                 std::size_t offset, std::size_t len, std::size_t* begin,
                 std::size_t* end) {
  std::smatch m;
  auto first = text.cbegin() + static_cast<std::ptrdiff_t>(offset);
  auto last = first + static_cast<std::ptrdiff_t>(len);
  if (!std::regex_search(first, last, m, re)) return false;
  *begin = offset + static_cast<std::size_t>(m.position(0));
  *end = *begin + static_cast<std::size_t>(m.length(0));
  return true;
}

}  // namespace

WeakLabel apply_ruleset(const RuleSet& rs, const Document& doc) {
  WeakLabel out{doc.id, rs.default_label, {}};
  const std::string text = lowercased(doc.text);
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // lazy

  for (std::size_t li = 0; li < rs.layers.size(); ++li) {
    const RuleLayer& layer = rs.layers[li];
    if (layer.kind == RuleLayer::Kind::Any) {
      for (const auto& p : layer.patterns) {
        std::size_t b, e;
        if (first_match(p.re, text, 0, text.size(), &b, &e)) {
          out.label = layer.label;
          out.trace.push_back({li, p.source, b, e});
          return out;
        }
      }
    } else {
      if (spans.empty()) spans = segment_sentences(text);
      for (const auto& [sb, se] : spans) {
        std::size_t ab = 0, ae = 0, bb = 0, be = 0;
        const RulePattern* pa = nullptr;
        const RulePattern* pb = nullptr;
        for (const auto& p : layer.set_a) {
          if (first_match(p.re, text, sb, se - sb, &ab, &ae)) {
            pa = &p;
            break;
          }
        }
        if (!pa) continue;
        for (const auto& p : layer.set_b) {
          if (first_match(p.re, text, sb, se - sb, &bb, &be)) {
            pb = &p;
            break;
          }
        }
        if (!pb) continue;
        out.label = layer.label;
        out.trace.push_back({li, pa->source, ab, ae});
        out.trace.push_back({li, pb->source, bb, be});
        return out;
      }
    }
  }
  return out;
}

std::vector<WeakLabel> label_corpus(const RuleSet& rs,
                                    const std::vector<Document>& corpus,
                                    unsigned threads) {
  std::vector<WeakLabel> out(corpus.size());
  if (threads <= 1 || corpus.size() < 2) {
    for (std::size_t i = 0; i < corpus.size(); ++i)
      out[i] = apply_ruleset(rs, corpus[i]);
    return out;
  }
  std::vector<std::thread> pool;
  std::size_t n = corpus.size();
  std::size_t per = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t lo = t * per, hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      for (std::size_t i = lo; i < hi; ++i)
        out[i] = apply_ruleset(rs, corpus[i]);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace dswe
