#include "spancoref/conll.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace coref {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string f;
  while (iss >> f) out.push_back(std::move(f));
  return out;
}

constexpr int kMinColumns = 12;

std::string genre_of(const std::string& name) {
  auto slash = name.find('/');
  return slash == std::string::npos ? name : name.substr(0, slash);
}

struct OpenMention {
  int start_word;
};

}  // namespace

std::pair<std::string, int> split_doc_key(const std::string& doc_key) {
  auto us = doc_key.rfind('_');
  if (us != std::string::npos && us + 1 < doc_key.size()) {
    const std::string suffix = doc_key.substr(us + 1);
    if (std::all_of(suffix.begin(), suffix.end(),
                    [](char c) { return c >= '0' && c <= '9'; }))
      return {doc_key.substr(0, us), std::stoi(suffix)};
  }
  return {doc_key, 0};
}

std::vector<Document> parse_conll(const std::string& path,
                                  std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CoNLL file: " + path);
  return parse_conll_stream(in, path, warnings);
}

std::vector<Document> parse_conll_stream(std::istream& in,
                                         const std::string& source_name,
                                         std::vector<std::string>* warnings) {
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;

  bool in_doc = false;
  Document doc;
  int sentence_index = 0;
  bool sentence_has_tokens = false;
  // cluster id -> stack of open mentions / collected spans
  std::map<int, std::vector<OpenMention>> open;
  std::map<int, std::vector<Span>> spans_by_id;

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  auto finish_doc = [&]() {
    for (const auto& [id, stack] : open)
      if (!stack.empty())
        throw ParseError("unbalanced coreference parentheses (cluster " +
                         std::to_string(id) + ") in document " + doc.doc_key);
    std::set<Span> assigned;
    for (auto& [id, spans] : spans_by_id) {
      std::sort(spans.begin(), spans.end());
      spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
      std::vector<Span> kept;
      for (const Span& s : spans) {
        if (assigned.count(s)) {
          warn("document " + doc.doc_key + ": span [" +
               std::to_string(s.start) + "," + std::to_string(s.end) +
               "] annotated in two clusters; keeping the first");
          continue;
        }
        kept.push_back(s);
      }
      if (kept.size() < 2) {
        if (!kept.empty())
          warn("document " + doc.doc_key + ": dropping singleton cluster " +
               std::to_string(id));
        continue;
      }
      for (const Span& s : kept) assigned.insert(s);
      doc.gold_clusters.push_back(std::move(kept));
    }
    doc.validate();
    docs.push_back(std::move(doc));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    if (line.rfind("#begin document", 0) == 0) {
      // "#begin document (name); part NNN"
      auto lp = line.find('(');
      auto rp = line.find(')');
      if (lp == std::string::npos || rp == std::string::npos || rp < lp)
        throw ParseError(source_name + ":" + std::to_string(line_no) +
                         ": malformed #begin document line");
      const std::string name = line.substr(lp + 1, rp - lp - 1);
      int part = 0;
      auto pp = line.find("part", rp);
      if (pp != std::string::npos) part = std::atoi(line.c_str() + pp + 4);
      char partbuf[8];
      std::snprintf(partbuf, sizeof(partbuf), "%03d", part);
      doc = Document{};
      doc.doc_key = name + "_" + partbuf;
      doc.genre = genre_of(name);
      sentence_index = 0;
      sentence_has_tokens = false;
      open.clear();
      spans_by_id.clear();
      in_doc = true;
      continue;
    }
    if (line.rfind("#end document", 0) == 0) {
      if (!in_doc)
        throw ParseError(source_name + ":" + std::to_string(line_no) +
                         ": #end document without #begin");
      finish_doc();
      in_doc = false;
      continue;
    }
    if (!in_doc) {
      if (line.empty() || line[0] == '#') continue;
      throw ParseError(source_name + ":" + std::to_string(line_no) +
                       ": token line outside of a document");
    }
    if (line.empty()) {
      if (sentence_has_tokens) {
        ++sentence_index;
        sentence_has_tokens = false;
      }
      continue;
    }
    if (line[0] == '#') continue;

    const auto cols = split_ws(line);
    if (static_cast<int>(cols.size()) < kMinColumns)
      throw ParseError(source_name + ":" + std::to_string(line_no) +
                       ": malformed column count (" +
                       std::to_string(cols.size()) + " < " +
                       std::to_string(kMinColumns) + ")");

    Token tok;
    tok.text = cols[3];
    tok.word_index = doc.n_words();
    tok.sentence_index = sentence_index;
    if (cols[9] != "-") tok.speaker = cols[9];
    const int w = tok.word_index;
    doc.tokens.push_back(std::move(tok));
    sentence_has_tokens = true;

    // Coreference column: items like "(0", "0)", "(0)" joined by "|".
    const std::string& coref = cols.back();
    if (coref != "-") {
      size_t i = 0;
      while (i < coref.size()) {
        size_t j = coref.find('|', i);
        if (j == std::string::npos) j = coref.size();
        std::string item = coref.substr(i, j - i);
        i = j + 1;
        if (item.empty())
          throw ParseError(source_name + ":" + std::to_string(line_no) +
                           ": empty coreference item");
        bool opens = item.front() == '(';
        bool closes = item.back() == ')';
        std::string digits = item.substr(opens ? 1 : 0,
                                         item.size() - (opens ? 1 : 0) -
                                             (closes ? 1 : 0));
        if (digits.empty() ||
            !std::all_of(digits.begin(), digits.end(), [](char c) {
              return c >= '0' && c <= '9';
            }))
          throw ParseError(source_name + ":" + std::to_string(line_no) +
                           ": malformed coreference item '" + item + "'");
        const int id = std::stoi(digits);
        if (opens && closes) {
          spans_by_id[id].push_back(Span(w, w));
        } else if (opens) {
          open[id].push_back({w});
        } else if (closes) {
          auto& stack = open[id];
          if (stack.empty())
            throw ParseError("unbalanced coreference parentheses (cluster " +
                             std::to_string(id) + ") in document " +
                             doc.doc_key);
          spans_by_id[id].push_back(Span(stack.back().start_word, w));
          stack.pop_back();
        } else {
          throw ParseError(source_name + ":" + std::to_string(line_no) +
                           ": malformed coreference item '" + item + "'");
        }
      }
    }
  }
  if (in_doc)
    throw ParseError(source_name + ": missing #end document for " +
                     doc.doc_key);
  return docs;
}

void write_conll(const std::vector<Document>& docs,
                 const std::vector<ClusterSet>& clusters,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  write_conll_stream(docs, clusters, out);
}

void write_conll_stream(const std::vector<Document>& docs,
                        const std::vector<ClusterSet>& clusters,
                        std::ostream& out) {
  if (docs.size() != clusters.size())
    throw ContractViolation("write_conll: docs/clusters size mismatch");

  for (size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs[d];
    const int n = doc.n_words();

    // Per token: cluster ids opening / closing / single-token.
    struct Marks {
      std::vector<std::pair<Span, int>> open;    // sorted: longest first
      std::vector<std::pair<Span, int>> close;   // innermost first
      std::vector<int> single;
    };
    std::vector<Marks> marks(std::max(n, 1));
    std::set<Span> assigned;
    for (size_t c = 0; c < clusters[d].clusters.size(); ++c) {
      const std::set<Span> unique_spans(clusters[d].clusters[c].begin(),
                                        clusters[d].clusters[c].end());
      for (const Span& s : unique_spans) {
        if (s.start < 0 || s.end >= n || s.start > s.end)
          throw ContractViolation("write_conll: span out of bounds in " +
                                  doc.doc_key);
        if (!assigned.insert(s).second)
          throw ContractViolation(
              "write_conll: identical span assigned to two clusters in " +
              doc.doc_key);
        const int id = static_cast<int>(c);
        if (s.start == s.end) {
          marks[s.start].single.push_back(id);
        } else {
          marks[s.start].open.push_back({s, id});
          marks[s.end].close.push_back({s, id});
        }
      }
    }
    for (auto& m : marks) {
      std::sort(m.open.begin(), m.open.end(), [](auto& a, auto& b) {
        if (a.first.end != b.first.end) return a.first.end > b.first.end;
        return a.second < b.second;
      });
      std::sort(m.close.begin(), m.close.end(), [](auto& a, auto& b) {
        if (a.first.start != b.first.start) return a.first.start > b.first.start;
        return a.second < b.second;
      });
      std::sort(m.single.begin(), m.single.end());
    }

    const auto [name, part] = split_doc_key(doc.doc_key);
    char partbuf[8];
    std::snprintf(partbuf, sizeof(partbuf), "%d", part);
    out << "#begin document (" << name << "); part ";
    {
      char p3[8];
      std::snprintf(p3, sizeof(p3), "%03d", part);
      out << p3 << "\n";
    }

    int word_in_sentence = 0;
    for (int w = 0; w < n; ++w) {
      const Token& tok = doc.tokens[w];
      if (w > 0 && tok.sentence_index != doc.tokens[w - 1].sentence_index) {
        out << "\n";
        word_in_sentence = 0;
      }
      std::string coref;
      auto append = [&coref](const std::string& item) {
        if (!coref.empty()) coref += '|';
        coref += item;
      };
      for (const auto& [s, id] : marks[w].open)
        append("(" + std::to_string(id));
      for (int id : marks[w].single)
        append("(" + std::to_string(id) + ")");
      for (const auto& [s, id] : marks[w].close)
        append(std::to_string(id) + ")");
      if (coref.empty()) coref = "-";

      out << name << "   " << partbuf << "   " << word_in_sentence << "   "
          << tok.text << "   -   *   -   -   -   "
          << (tok.speaker ? *tok.speaker : std::string("-")) << "   *   "
          << coref << "\n";
      ++word_in_sentence;
    }
    out << "\n#end document\n";
  }
}

}  // namespace coref
