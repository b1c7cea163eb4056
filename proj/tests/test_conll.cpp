#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spancoref/conll.hpp"

using namespace coref;

namespace {
std::string testdata(const std::string& name) {
  return std::string(TESTDATA_DIR) + "/" + name;
}
}  // namespace

TEST_CASE("parse_conll reconstructs clusters from paren matching") {
  const auto docs = parse_conll(testdata("toy3.conll"));
  REQUIRE(docs.size() == 1);
  const Document& d = docs[0];
  CHECK(d.doc_key == "test/toy3_000");
  CHECK(d.genre == "test");
  CHECK(d.n_words() == 11);
  CHECK(d.n_sentences() == 3);
  REQUIRE(d.gold_clusters.size() == 2);
  CHECK(d.gold_clusters[0] == std::vector<Span>{Span(0, 0), Span(5, 6)});
  CHECK(d.gold_clusters[1] == std::vector<Span>{Span(2, 3), Span(8, 8)});
}

TEST_CASE("two-token open/close pair forms one span merged by cluster id") {
  std::istringstream in(
      "#begin document (t/x); part 000\n"
      "t/x   0   0   a   -   *   -   -   -   -   *   (0\n"
      "t/x   0   1   b   -   *   -   -   -   -   *   0)\n"
      "t/x   0   2   c   -   *   -   -   -   -   *   (0)\n"
      "#end document\n");
  const auto docs = parse_conll_stream(in, "inline");
  REQUIRE(docs.size() == 1);
  REQUIRE(docs[0].gold_clusters.size() == 1);
  CHECK(docs[0].gold_clusters[0] ==
        std::vector<Span>{Span(0, 1), Span(2, 2)});
}

TEST_CASE("document without coreference annotations has empty clusters") {
  const auto docs = parse_conll(testdata("edge_cases.conll"));
  REQUIRE(docs.size() == 4);
  const Document& empty = docs[3];
  CHECK(empty.doc_key == "test/empty_001");
  CHECK(empty.gold_clusters.empty());
}

TEST_CASE("singleton clusters are dropped with a warning") {
  std::vector<std::string> warnings;
  const auto docs = parse_conll(testdata("edge_cases.conll"), &warnings);
  const Document& single = docs[1];
  CHECK(single.doc_key == "test/singleton_000");
  CHECK(single.gold_clusters.empty());
  bool mentioned = false;
  for (const auto& w : warnings)
    if (w.find("singleton") != std::string::npos &&
        w.find("test/singleton_000") != std::string::npos)
      mentioned = true;
  CHECK(mentioned);
}

TEST_CASE("speaker column maps onto tokens") {
  const auto docs = parse_conll(testdata("edge_cases.conll"));
  const Document& d = docs[0];
  REQUIRE(d.n_words() == 6);
  CHECK(d.tokens[0].speaker == "Anna_Lee");
  CHECK(d.tokens[2].speaker == "Ben");
  CHECK(d.tokens[4].speaker == "Anna_Lee");
  REQUIRE(d.gold_clusters.size() == 1);
  CHECK(d.gold_clusters[0] == std::vector<Span>{Span(3, 3), Span(4, 4)});
}

TEST_CASE("malformed column count reports the line") {
  std::istringstream in(
      "#begin document (t/x); part 000\n"
      "t/x   0   0   a   -\n"
      "#end document\n");
  CHECK_THROWS_WITH_AS(parse_conll_stream(in, "inline"),
                       doctest::Contains("inline:2"), ParseError);
}

TEST_CASE("unbalanced coreference parens report the doc key") {
  std::istringstream in(
      "#begin document (t/x); part 000\n"
      "t/x   0   0   a   -   *   -   -   -   -   *   (0\n"
      "#end document\n");
  CHECK_THROWS_WITH_AS(parse_conll_stream(in, "inline"),
                       doctest::Contains("t/x_000"), ParseError);
}

TEST_CASE("stray close paren is a parse error") {
  std::istringstream in(
      "#begin document (t/x); part 000\n"
      "t/x   0   0   a   -   *   -   -   -   -   *   3)\n"
      "#end document\n");
  CHECK_THROWS_AS(parse_conll_stream(in, "inline"), ParseError);
}

TEST_CASE("round trip: parse -> write -> parse is the identity") {
  const auto docs = parse_conll(testdata("toy3.conll"));
  std::vector<ClusterSet> gold;
  for (const auto& d : docs) gold.push_back(ClusterSet{d.gold_clusters});

  std::ostringstream out;
  write_conll_stream(docs, gold, out);
  std::istringstream back(out.str());
  const auto docs2 = parse_conll_stream(back, "round-trip");

  REQUIRE(docs2.size() == docs.size());
  for (size_t i = 0; i < docs.size(); ++i) {
    CHECK(docs2[i].doc_key == docs[i].doc_key);
    REQUIRE(docs2[i].n_words() == docs[i].n_words());
    for (int w = 0; w < docs[i].n_words(); ++w) {
      CHECK(docs2[i].tokens[w].text == docs[i].tokens[w].text);
      CHECK(docs2[i].tokens[w].sentence_index ==
            docs[i].tokens[w].sentence_index);
      CHECK(docs2[i].tokens[w].speaker == docs[i].tokens[w].speaker);
    }
    CHECK(docs2[i].gold_clusters == docs[i].gold_clusters);
  }

  // A second pass is byte-stable.
  std::ostringstream out2;
  std::vector<ClusterSet> gold2;
  for (const auto& d : docs2) gold2.push_back(ClusterSet{d.gold_clusters});
  write_conll_stream(docs2, gold2, out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("nested mentions from different clusters round-trip") {
  const auto docs = parse_conll(testdata("edge_cases.conll"));
  const Document& nested = docs[2];
  REQUIRE(nested.gold_clusters.size() == 2);
  CHECK(nested.gold_clusters[0] == std::vector<Span>{Span(0, 3), Span(4, 4)});
  CHECK(nested.gold_clusters[1] == std::vector<Span>{Span(1, 1), Span(6, 6)});

  std::ostringstream out;
  write_conll_stream({nested}, {ClusterSet{nested.gold_clusters}}, out);
  std::istringstream back(out.str());
  const auto docs2 = parse_conll_stream(back, "nested-rt");
  CHECK(docs2[0].gold_clusters == nested.gold_clusters);
}

TEST_CASE("empty cluster set writes a dash coreference column") {
  const auto docs = parse_conll(testdata("toy3.conll"));
  std::ostringstream out;
  write_conll_stream(docs, {ClusterSet{}}, out);
  std::istringstream ss(out.str());
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    CHECK(line.back() == '-');
  }
}

TEST_CASE("same span in two clusters is a serialization error") {
  const auto docs = parse_conll(testdata("toy3.conll"));
  ClusterSet bad;
  bad.clusters = {{Span(0, 0), Span(5, 6)}, {Span(0, 0), Span(8, 8)}};
  std::ostringstream out;
  CHECK_THROWS_AS(write_conll_stream(docs, {bad}, out), ContractViolation);
}

TEST_CASE("out-of-bounds predicted span is a serialization error") {
  const auto docs = parse_conll(testdata("toy3.conll"));
  ClusterSet bad;
  bad.clusters = {{Span(0, 0), Span(10, 11)}};
  std::ostringstream out;
  CHECK_THROWS_AS(write_conll_stream(docs, {bad}, out), ContractViolation);
}

TEST_CASE("span annotated in two gold clusters keeps its first cluster") {
  std::istringstream in(
      "#begin document (t/dup); part 000\n"
      "t/dup   0   0   a   -   *   -   -   -   -   *   (0|(1\n"
      "t/dup   0   1   b   -   *   -   -   -   -   *   0)|1)\n"
      "t/dup   0   2   c   -   *   -   -   -   -   *   (0)\n"
      "t/dup   0   3   d   -   *   -   -   -   -   *   (1)\n"
      "#end document\n");
  std::vector<std::string> warnings;
  const auto docs = parse_conll_stream(in, "inline", &warnings);
  REQUIRE(docs[0].gold_clusters.size() == 1);
  CHECK(docs[0].gold_clusters[0] == std::vector<Span>{Span(0, 1), Span(2, 2)});
  CHECK(!warnings.empty());
}

TEST_CASE("every parsed mention's surface string is recoverable") {
  for (const auto& d : parse_conll(testdata("toy3.conll")))
    for (const auto& cluster : d.gold_clusters)
      for (const Span& s : cluster) CHECK(!d.span_text(s).empty());
}

TEST_CASE("split_doc_key inverts the name_part convention") {
  CHECK(split_doc_key("bc/cctv/00/cctv_0000_000") ==
        std::pair<std::string, int>{"bc/cctv/00/cctv_0000", 0});
  CHECK(split_doc_key("test/toy3_012") ==
        std::pair<std::string, int>{"test/toy3", 12});
  CHECK(split_doc_key("plain") == std::pair<std::string, int>{"plain", 0});
}
