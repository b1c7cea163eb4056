#include "spancoref/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace coref {

Span Document::sentence_span(int w) const {
  if (w < 0 || w >= n_words())
    throw ContractViolation("sentence_span: word index out of range");
  const int sent = tokens[w].sentence_index;
  int first = w, last = w;
  while (first > 0 && tokens[first - 1].sentence_index == sent) --first;
  while (last + 1 < n_words() && tokens[last + 1].sentence_index == sent)
    ++last;
  return Span(first, last);
}

std::string Document::span_text(const Span& s) const {
  if (s.start < 0 || s.end >= n_words() || s.start > s.end)
    throw ContractViolation("span_text: span out of document bounds");
  std::string out;
  for (int w = s.start; w <= s.end; ++w) {
    if (w > s.start) out += ' ';
    out += tokens[w].text;
  }
  return out;
}

void Document::validate() const {
  for (int w = 0; w < n_words(); ++w) {
    if (tokens[w].word_index != w)
      throw ContractViolation("document " + doc_key +
                              ": word_index values must be 0..n-1 with no gaps");
    if (w > 0 && tokens[w].sentence_index < tokens[w - 1].sentence_index)
      throw ContractViolation("document " + doc_key +
                              ": sentence_index must be non-decreasing");
  }
  std::set<Span> seen;
  for (const auto& cluster : gold_clusters) {
    if (cluster.size() < 2)
      throw ContractViolation("document " + doc_key +
                              ": gold cluster with fewer than 2 mentions");
    std::set<Span> in_cluster;
    for (const Span& s : cluster) {
      if (s.start < 0 || s.end >= n_words() || s.start > s.end)
        throw ContractViolation("document " + doc_key +
                                ": gold span out of bounds");
      if (!in_cluster.insert(s).second)
        throw ContractViolation("document " + doc_key +
                                ": duplicate span within one cluster");
      if (!seen.insert(s).second)
        throw ContractViolation("document " + doc_key +
                                ": span appears in two gold clusters");
    }
  }
}

void ClusterSet::validate() const {
  std::set<Span> seen;
  for (const auto& cluster : clusters) {
    if (cluster.size() < 2)
      throw ContractViolation("cluster set: cluster with fewer than 2 spans");
    for (const Span& s : cluster)
      if (!seen.insert(s).second)
        throw ContractViolation("cluster set: span appears in two clusters");
  }
}

namespace {
bool is_word_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '(': case ')': case '[': case ']':
      return true;
    default:
      return false;
  }
}
}  // namespace

std::vector<SimpleToken> simple_tokenize(const std::string& text) {
  std::vector<SimpleToken> out;
  const int n = static_cast<int>(text.size());
  int i = 0;
  while (i < n) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (is_word_punct(text[i])) {
      out.push_back({std::string(1, text[i]), i, i + 1});
      ++i;
      continue;
    }
    int j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j])) &&
           !is_word_punct(text[j]))
      ++j;
    out.push_back({text.substr(i, j - i), i, j});
    i = j;
  }
  return out;
}

std::vector<int> simple_sentence_index(const std::vector<SimpleToken>& toks) {
  std::vector<int> idx(toks.size(), 0);
  int sent = 0;
  for (size_t t = 0; t < toks.size(); ++t) {
    idx[t] = sent;
    const std::string& w = toks[t].text;
    if (w == "." || w == "!" || w == "?") ++sent;
  }
  return idx;
}

Span char_span_to_words(const std::vector<SimpleToken>& toks, int begin,
                        int end, const std::string& what) {
  int first = -1, last = -1;
  for (size_t t = 0; t < toks.size(); ++t) {
    if (toks[t].char_start < end && begin < toks[t].char_end) {
      if (first < 0) first = static_cast<int>(t);
      last = static_cast<int>(t);
    }
  }
  if (first < 0)
    throw ParseError(what + ": character span covers no token");
  return Span(first, last);
}

}  // namespace coref
