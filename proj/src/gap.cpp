#include "spancoref/gap.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace coref {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (true) {
    size_t j = line.find('\t', i);
    if (j == std::string::npos) {
      out.push_back(line.substr(i));
      break;
    }
    out.push_back(line.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_bool(const std::string& s) {
  const std::string l = lower(s);
  return l == "true" || l == "1";
}

CharSpan make_span(const std::string& ex_id, const std::string& text,
                   const std::string& surface, const std::string& offset_str) {
  int off = 0;
  try {
    off = std::stoi(offset_str);
  } catch (const std::exception&) {
    throw ParseError("GAP example " + ex_id + ": bad offset '" + offset_str +
                     "'");
  }
  if (off < 0 || off + static_cast<int>(surface.size()) >
                     static_cast<int>(text.size()))
    throw ParseError("GAP example " + ex_id + ": offset out of text bounds");
  if (text.compare(off, surface.size(), surface) != 0)
    throw ParseError("GAP example " + ex_id +
                     ": offset/text mismatch (expected '" + surface + "')");
  return CharSpan{off, off + static_cast<int>(surface.size())};
}

}  // namespace

PronounGender gender_of_pronoun(const std::string& pronoun) {
  const std::string p = lower(pronoun);
  if (p == "she" || p == "her" || p == "hers")
    return PronounGender::feminine;
  return PronounGender::masculine;  // he / him / his
}

std::vector<GapExample> parse_gap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open GAP file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_gap_string(buf.str(), path);
}

std::vector<GapExample> parse_gap_string(const std::string& tsv,
                                         const std::string& source_name) {
  std::vector<GapExample> out;
  std::istringstream in(tsv);
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (first) {
      first = false;
      if (!cols.empty() && cols[0] == "ID") continue;  // header
    }
    if (cols.size() < 10)
      throw ParseError(source_name + ":" + std::to_string(line_no) +
                       ": GAP row needs >= 10 tab-separated columns");
    GapExample ex;
    ex.example_id = cols[0];
    ex.text = cols[1];
    ex.pronoun_chars = make_span(ex.example_id, ex.text, cols[2], cols[3]);
    ex.candidate_a_chars = make_span(ex.example_id, ex.text, cols[4], cols[5]);
    ex.a_is_coreferent = parse_bool(cols[6]);
    ex.candidate_b_chars = make_span(ex.example_id, ex.text, cols[7], cols[8]);
    ex.b_is_coreferent = parse_bool(cols[9]);
    ex.pronoun_gender = gender_of_pronoun(cols[2]);
    out.push_back(std::move(ex));
  }
  return out;
}

GapDocument gap_to_document(const GapExample& ex) {
  const auto toks = simple_tokenize(ex.text);
  const auto sent = simple_sentence_index(toks);

  GapDocument gd;
  gd.doc.doc_key = "gap/" + ex.example_id + "_000";
  gd.doc.genre = "gap";
  for (size_t t = 0; t < toks.size(); ++t) {
    Token tok;
    tok.text = toks[t].text;
    tok.word_index = static_cast<int>(t);
    tok.sentence_index = sent[t];
    gd.doc.tokens.push_back(std::move(tok));
  }
  const std::string tag = "GAP example " + ex.example_id;
  gd.pronoun = char_span_to_words(toks, ex.pronoun_chars.begin,
                                  ex.pronoun_chars.end, tag);
  gd.candidate_a = char_span_to_words(toks, ex.candidate_a_chars.begin,
                                      ex.candidate_a_chars.end, tag);
  gd.candidate_b = char_span_to_words(toks, ex.candidate_b_chars.begin,
                                      ex.candidate_b_chars.end, tag);
  return gd;
}

}  // namespace coref
