#include "spancoref/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace coref {

namespace {
constexpr int kNumReservedUnused = 4;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& words,
                             const SpecialTokens& specials, size_t max_words) {
  Vocabulary v;
  v.specials_ = specials;
  v.pieces_ = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", specials.speaker_open,
               specials.speaker_close, specials.mention_open,
               specials.mention_close};
  for (int u = 0; u < kNumReservedUnused; ++u)
    v.pieces_.push_back("[unused" + std::to_string(u) + "]");

  std::map<std::string, long> freq;
  std::set<std::string> chars;
  for (const std::string& w : words) {
    if (w.empty()) continue;
    ++freq[w];
    for (char c : w) chars.insert(std::string(1, c));
  }
  // Character fallback pieces first so rare words always decompose.
  std::set<std::string> have(v.pieces_.begin(), v.pieces_.end());
  for (const std::string& c : chars) {
    for (const std::string& piece : {c, "##" + c}) {
      if (have.insert(piece).second) v.pieces_.push_back(piece);
    }
  }
  // Whole words by descending frequency, ties lexicographic.
  std::vector<std::pair<std::string, long>> by_freq(freq.begin(), freq.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  for (const auto& [w, f] : by_freq) {
    if (v.pieces_.size() >= max_words) break;
    if (have.insert(w).second) v.pieces_.push_back(w);
  }
  v.index();
  return v;
}

std::vector<std::string> Vocabulary::collect_words(
    const std::vector<Document>& docs) {
  std::vector<std::string> words;
  for (const Document& doc : docs) {
    for (const Token& tok : doc.tokens) {
      words.push_back(tok.text);
      if (tok.speaker) {
        std::istringstream iss(*tok.speaker);
        std::string piece;
        while (iss >> piece) words.push_back(piece);
      }
    }
  }
  return words;
}

void Vocabulary::index() {
  id_of_.clear();
  for (size_t i = 0; i < pieces_.size(); ++i)
    id_of_[pieces_[i]] = static_cast<int>(i);
}

int Vocabulary::piece_id(const std::string& piece) const {
  auto it = id_of_.find(piece);
  return it == id_of_.end() ? -1 : it->second;
}

std::vector<int> Vocabulary::tokenize_word(const std::string& word) const {
  const int whole = piece_id(word);
  if (whole >= 0) return {whole};
  std::vector<int> out;
  for (size_t i = 0; i < word.size(); ++i) {
    const std::string c(1, word[i]);
    const int id = piece_id(i == 0 ? c : "##" + c);
    out.push_back(id >= 0 ? id : unk_id());
  }
  if (out.empty()) out.push_back(unk_id());
  return out;
}

std::string Vocabulary::detokenize(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    const std::string& p = piece(id);
    if (p.rfind("##", 0) == 0)
      out += p.substr(2);
    else
      out += p;
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open vocabulary for writing: " + path);
  for (const std::string& p : pieces_) out << p << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.pieces_.push_back(line);
  }
  if (v.pieces_.size() < 8 + kNumReservedUnused)
    throw std::runtime_error("vocabulary too small to hold reserved entries: " +
                             path);
  v.specials_.speaker_open = v.pieces_[4];
  v.specials_.speaker_close = v.pieces_[5];
  v.specials_.mention_open = v.pieces_[6];
  v.specials_.mention_close = v.pieces_[7];
  v.index();
  return v;
}

TokenizedSequence tokenize_sequence(const Vocabulary& vocab,
                                    const AugmentedSequence& seq) {
  TokenizedSequence out;
  out.first_flat.resize(seq.size(), -1);
  out.last_flat.resize(seq.size(), -1);
  for (int a = 0; a < seq.size(); ++a) {
    const std::vector<int> ids = vocab.tokenize_word(seq.pieces[a].text);
    out.first_flat[a] = out.size();
    for (int id : ids) {
      out.piece_ids.push_back(id);
      out.aug_of_flat.push_back(a);
    }
    out.last_flat[a] = out.size() - 1;
  }
  return out;
}

}  // namespace coref
