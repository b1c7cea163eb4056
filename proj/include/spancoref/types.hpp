#ifndef SPANCOREF_TYPES_HPP
#define SPANCOREF_TYPES_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coref {

// Errors raised while reading external data files. The message names the
// offending line / doc_key / example id.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violation of an operation precondition by the caller.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Bad configuration value (e.g. odd window size).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training diverged (non-finite loss).
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inclusive word-index interval identifying a candidate mention.
struct Span {
  int start = 0;
  int end = 0;  // inclusive

  Span() = default;
  Span(int s, int e) : start(s), end(e) {}

  int width() const { return end - start + 1; }
  bool contains(int w) const { return start <= w && w <= end; }
  bool overlaps(const Span& o) const {
    return start <= o.end && o.start <= end;
  }

  auto operator<=>(const Span&) const = default;
};

struct Token {
  std::string text;
  int word_index = 0;      // document-level, 0..n-1
  int sentence_index = 0;  // non-decreasing in word_index order
  std::optional<std::string> speaker;
};

struct Document {
  std::string doc_key;  // "name_part" for CoNLL documents
  std::string genre;
  std::vector<Token> tokens;
  std::vector<std::vector<Span>> gold_clusters;

  int n_words() const { return static_cast<int>(tokens.size()); }
  int n_sentences() const {
    return tokens.empty() ? 0 : tokens.back().sentence_index + 1;
  }

  // [first_word, last_word] of the sentence containing word w.
  Span sentence_span(int w) const;

  std::string span_text(const Span& s) const;

  // Throws ContractViolation if tokens or clusters break the documented
  // invariants (word_index gaps, out-of-range spans, ...).
  void validate() const;
};

// A partition of a subset of spans into coreference clusters.
struct ClusterSet {
  std::vector<std::vector<Span>> clusters;

  bool empty() const { return clusters.empty(); }
  // Disjointness and min-size-2, as produced by the decoder.
  void validate() const;
};

enum class PronounGender { masculine, feminine };

// Half-open character interval [begin, end) into a raw text.
struct CharSpan {
  int begin = 0;
  int end = 0;

  int length() const { return end - begin; }
  auto operator<=>(const CharSpan&) const = default;
};

// One GAP row: an ambiguous pronoun and two candidate names, all as
// character spans into `text`.
struct GapExample {
  std::string example_id;
  std::string text;
  CharSpan pronoun_chars;
  CharSpan candidate_a_chars;
  CharSpan candidate_b_chars;
  bool a_is_coreferent = false;
  bool b_is_coreferent = false;
  PronounGender pronoun_gender = PronounGender::masculine;
};

// One extractive-QA example; answers are character spans into `context`.
struct QaExample {
  std::string id;
  std::string context;
  std::string question;
  struct CharAnswer {
    int start = 0;  // character offset
    std::string text;
  };
  std::vector<CharAnswer> answers;  // empty for unanswerable
};

// Whitespace+punctuation tokenization used to lift plain text (GAP, QA)
// to word-level documents. Returns tokens with character ranges
// [char_start, char_end).
struct SimpleToken {
  std::string text;
  int char_start = 0;
  int char_end = 0;
};
std::vector<SimpleToken> simple_tokenize(const std::string& text);

// Sentence split over simple_tokenize output: a token consisting of or
// ending in . ! ? closes a sentence.
std::vector<int> simple_sentence_index(const std::vector<SimpleToken>& toks);

// Word span covering a character interval: every token whose character
// range overlaps [begin, end). Throws ParseError (tagged with `what`) when
// no token overlaps.
Span char_span_to_words(const std::vector<SimpleToken>& toks, int begin,
                        int end, const std::string& what);

}  // namespace coref

#endif
