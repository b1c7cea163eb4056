#include "spancoref/synthetic.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

namespace coref {

namespace {

const std::vector<std::string> kMasculine = {"James", "Robert", "Michael",
                                             "David", "Thomas", "Daniel",
                                             "Henry", "Samuel"};
const std::vector<std::string> kFeminine = {"Mary",  "Linda", "Susan", "Karen",
                                            "Alice", "Emma",  "Julia", "Clara"};
const std::vector<std::string> kVerbs = {"met", "saw", "visited", "called"};
const std::vector<std::string> kVerbs2 = {"greeted", "thanked", "helped",
                                          "answered"};
const std::vector<std::string> kIntransitives = {"waved", "smiled", "nodded",
                                                 "laughed"};
const std::vector<std::string> kPredicates = {"is busy today",
                                              "seems rather tired",
                                              "was away yesterday",
                                              "looks very happy"};
const std::vector<std::string> kPlaces = {"near the park", "at the station",
                                          "in the garden", "by the lake"};
const std::vector<std::string> kAdverbs = {"warmly", "quietly", "quickly",
                                           "kindly"};
const std::vector<std::string> kFillers = {
    "The sun was shining brightly .", "It rained for hours .",
    "The streets were quiet .", "A cold wind blew outside ."};

template <typename T>
const T& pick(const std::vector<T>& pool, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
  return pool[d(rng)];
}

struct DocBuilder {
  Document doc;
  int sentence = 0;
  std::map<std::string, std::vector<Span>> clusters;  // entity key -> spans

  // Adds a sentence and records entity mentions. Placeholders of the form
  // {key:surface words} expand to their surface words and contribute one
  // mention span to the entity `key`.
  void add_marked(const std::string& marked,
                  const std::string& speaker = std::string()) {
    std::vector<std::pair<std::string, std::string>> words;  // (word, key)
    size_t i = 0;
    while (i < marked.size()) {
      if (marked[i] == ' ') {
        ++i;
        continue;
      }
      if (marked[i] == '{') {
        const size_t colon = marked.find(':', i);
        const size_t close = marked.find('}', i);
        const std::string key = marked.substr(i + 1, colon - i - 1);
        std::istringstream iss(marked.substr(colon + 1, close - colon - 1));
        std::string w;
        while (iss >> w) words.push_back({w, key});
        i = close + 1;
      } else {
        size_t j = i;
        while (j < marked.size() && marked[j] != ' ' && marked[j] != '{') ++j;
        words.push_back({marked.substr(i, j - i), std::string()});
        i = j;
      }
    }
    const int w0 = doc.n_words();
    for (const auto& [text, key] : words) {
      Token tok;
      tok.text = text;
      tok.word_index = doc.n_words();
      tok.sentence_index = sentence;
      if (!speaker.empty()) tok.speaker = speaker;
      doc.tokens.push_back(std::move(tok));
    }
    size_t k = 0;
    while (k < words.size()) {
      if (words[k].second.empty()) {
        ++k;
        continue;
      }
      size_t e = k;
      while (e + 1 < words.size() && words[e + 1].second == words[k].second)
        ++e;
      clusters[words[k].second].push_back(
          Span(w0 + static_cast<int>(k), w0 + static_cast<int>(e)));
      k = e + 1;
    }
    ++sentence;
  }

  void add_sentence(const std::string& text,
                    const std::string& speaker = std::string()) {
    add_marked(text, speaker);
  }

  Document finish() {
    for (auto& [key, spans] : clusters) {
      std::sort(spans.begin(), spans.end());
      spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
      if (spans.size() >= 2) doc.gold_clusters.push_back(spans);
    }
    doc.validate();
    return std::move(doc);
  }
};

}  // namespace

std::vector<Document> generate_synthetic_corpus(const SyntheticConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<Document> docs;

  for (int d = 0; d < cfg.num_documents; ++d) {
    DocBuilder b;
    b.doc.genre = "syn";

    if (cfg.num_speakers <= 0) {
      b.doc.doc_key = "syn/narrative/doc" + std::to_string(d) + "_000";
      const std::string a = pick(kMasculine, rng);
      const std::string bn = pick(kFeminine, rng);
      b.add_marked("{A:" + a + "} " + pick(kVerbs, rng) + " {B:" + bn + "} " +
                   pick(kPlaces, rng) + " .");
      for (int s = 0; s < cfg.extra_sentences; ++s) {
        switch (s % 3) {
          case 0:
            b.add_marked("{A:He} " + pick(kVerbs2, rng) + " {B:her} " +
                         pick(kAdverbs, rng) + " .");
            break;
          case 1:
            b.add_marked("{B:She} " + pick(kVerbs2, rng) + " {A:him} " +
                         pick(kAdverbs, rng) + " .");
            break;
          default:
            b.add_sentence(pick(kFillers, rng));
            break;
        }
      }
    } else {
      b.doc.doc_key = "syn/dialogue/doc" + std::to_string(d) + "_000";
      std::vector<std::string> pool = kMasculine;
      pool.insert(pool.end(), kFeminine.begin(), kFeminine.end());
      std::shuffle(pool.begin(), pool.end(), rng);
      const int k = std::min<int>(cfg.num_speakers, static_cast<int>(pool.size()));
      std::vector<std::string> speakers(pool.begin(), pool.begin() + k);

      // One first-person turn per speaker, then one third-person turn
      // naming each speaker, in shuffled order. Every cluster is {I, name}
      // with the two mentions in different speakers' turns, so neither a
      // same-speaker pair feature nor turn position nor surface matching
      // resolves "I"; the speaker's name in the input does.
      std::vector<int> round1(k), round2(k);
      for (int t = 0; t < k; ++t) round1[t] = round2[t] = t;
      std::shuffle(round1.begin(), round1.end(), rng);
      std::shuffle(round2.begin(), round2.end(), rng);
      for (int t : round1) {
        b.add_marked("{" + speakers[t] + ":I} " + pick(kIntransitives, rng) +
                         " " + pick(kAdverbs, rng) + " .",
                     speakers[t]);
      }
      for (int t : round2) {
        const std::string& who = speakers[(t + 1) % k];
        b.add_marked("{" + speakers[t] + ":" + speakers[t] + "} " +
                         pick(kPredicates, rng) + " .",
                     who);
      }
      for (int e = 0; e < cfg.extra_sentences; ++e)
        b.add_sentence(pick(kFillers, rng), speakers[e % k]);
    }
    docs.push_back(b.finish());
  }
  return docs;
}

std::string generate_synthetic_qa_json(const SyntheticConfig& cfg) {
  SyntheticConfig narrative = cfg;
  narrative.num_speakers = 0;
  const auto docs = generate_synthetic_corpus(narrative);

  nlohmann::json root;
  root["version"] = "v2.0";
  auto& data = root["data"];
  data = nlohmann::json::array();
  nlohmann::json article;
  article["title"] = "synthetic";
  auto& paragraphs = article["paragraphs"];
  paragraphs = nlohmann::json::array();

  int qid = 0;
  for (const Document& doc : docs) {
    // Context text with char offsets per word.
    std::string context;
    std::vector<int> word_char(doc.n_words(), 0);
    for (int w = 0; w < doc.n_words(); ++w) {
      if (w > 0) context += ' ';
      word_char[w] = static_cast<int>(context.size());
      context += doc.tokens[w].text;
    }
    nlohmann::json para;
    para["context"] = context;
    auto& qas = para["qas"];
    qas = nlohmann::json::array();

    // One answerable question per gold cluster: the opening sentence with
    // the cluster's first mention replaced by "who".
    for (const auto& cluster : doc.gold_clusters) {
      const Span& lead = cluster.front();
      std::string question;
      const Span s0 = doc.sentence_span(0);
      for (int w = s0.start; w <= s0.end; ++w) {
        if (doc.tokens[w].text == "." && w == s0.end) break;
        if (w == lead.start) {
          question += question.empty() ? "Who" : "who";
          w = lead.end;
        } else {
          question += doc.tokens[w].text;
        }
        question += ' ';
      }
      question += '?';
      nlohmann::json qa;
      qa["id"] = "syn-q" + std::to_string(qid++);
      qa["question"] = question;
      qa["is_impossible"] = false;
      auto& answers = qa["answers"];
      answers = nlohmann::json::array();
      for (const Span& m : cluster) {
        std::string text = doc.span_text(m);
        answers.push_back({{"text", text}, {"answer_start", word_char[m.start]}});
      }
      qas.push_back(qa);
    }
    // One unanswerable question.
    nlohmann::json qa;
    qa["id"] = "syn-q" + std::to_string(qid++);
    qa["question"] = "Who stayed at home all day ?";
    qa["is_impossible"] = true;
    qa["answers"] = nlohmann::json::array();
    qas.push_back(qa);

    paragraphs.push_back(para);
  }
  data.push_back(article);
  return root.dump(2);
}

}  // namespace coref
