#include "dswe/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "dswe/util.hpp"

namespace dswe {

namespace {

bool is_token_char(std::string_view text, std::size_t i) {
  char c = text[i];
  if (is_alnum_ascii(c)) return true;
  if (c == '\'' || c == '?' || c == '-') {
    return i > 0 && i + 1 < text.size() && is_alnum_ascii(text[i - 1]) &&
           is_alnum_ascii(text[i + 1]);
  }
  return false;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_token_char(text, i)) {
      char c = text[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      cur.push_back(c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<std::pair<std::size_t, std::size_t>> segment_sentences(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  auto is_boundary = [&](std::size_t i) {
    char c = text[i];
    if (c == '.' || c == '!' || c == ';' || c == '\n') return true;
    if (c == '?') {
      // a '?' glued between alphanumerics belongs to the token, not the
      // sentence boundary set
      return !(i > 0 && i + 1 < text.size() && is_alnum_ascii(text[i - 1]) &&
               is_alnum_ascii(text[i + 1]));
    }
    return false;
  };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_boundary(i)) {
      std::size_t j = i;
      while (j < text.size() && is_boundary(j)) ++j;
      spans.emplace_back(start, j);
      start = j;
      i = j;
    } else {
      ++i;
    }
  }
  if (start < text.size()) spans.emplace_back(start, text.size());
  return spans;
}

TokenizedDocument tokenize_document(const Document& doc) {
  TokenizedDocument out;
  out.doc_id = doc.id;
  out.sentence_spans = segment_sentences(doc.text);
  out.sentences.reserve(out.sentence_spans.size());
  for (const auto& [b, e] : out.sentence_spans) {
    auto toks = tokenize(std::string_view(doc.text).substr(b, e - b));
    out.tokens.insert(out.tokens.end(), toks.begin(), toks.end());
    out.sentences.push_back(std::move(toks));
  }
  return out;
}

std::vector<Document> parse_corpus(std::istream& in, const std::string& name) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": malformed record: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("text") || !j["text"].is_string()) {
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": record must have string fields id, text");
    }
    Document d;
    d.id = j["id"].get<std::string>();
    d.text = j["text"].get<std::string>();
    if (d.id.empty()) {
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": empty id");
    }
    if (j.contains("gold") && !j["gold"].is_null()) {
      if (!j["gold"].is_string()) {
        throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                 ": gold must be a string");
      }
      d.gold = j["gold"].get<std::string>();
    }
    if (!seen.insert(d.id).second) {
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": duplicate id \"" + d.id + "\"");
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return parse_corpus(in, path);
}

}  // namespace dswe
