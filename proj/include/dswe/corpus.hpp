#ifndef DSWE_CORPUS_HPP
#define DSWE_CORPUS_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dswe {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> gold;
};

struct TokenizedDocument {
  std::string doc_id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> tokens;  // flattened, lowercased
  // character span [begin, end) of each sentence in the raw text
  std::vector<std::pair<std::size_t, std::size_t>> sentence_spans;
};

// Lowercases and splits on any run of characters outside [a-z0-9'?-].
// The characters ' ? - stay inside a token only when flanked by
// alphanumerics on both sides.
std::vector<std::string> tokenize(std::string_view text);

// Sentence spans covering the full text in order. A maximal run of
// [.?!;\n] closes the current sentence (and belongs to it). A colon is
// not a boundary, and a '?' flanked by alphanumerics is treated as part
// of a token rather than a boundary.
std::vector<std::pair<std::size_t, std::size_t>> segment_sentences(
    std::string_view text);

TokenizedDocument tokenize_document(const Document& doc);

// Line-delimited JSON records {id, text, gold?}. Throws on a malformed
// line or a duplicate id, naming the line number.
std::vector<Document> load_corpus(const std::string& path);
std::vector<Document> parse_corpus(std::istream& in, const std::string& name);

}  // namespace dswe

#endif  // DSWE_CORPUS_HPP
