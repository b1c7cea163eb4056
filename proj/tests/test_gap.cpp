#include <sstream>

#include "doctest.h"
#include "spancoref/gap.hpp"

using namespace coref;

namespace {

struct GapRow {
  std::string id, text, pronoun, a, b;
  bool a_coref, b_coref;
};

// Builds a TSV with offsets located via find(), so the fixture stays
// self-consistent by construction.
std::string make_tsv(const std::vector<GapRow>& rows) {
  std::ostringstream out;
  out << "ID\tText\tPronoun\tPronoun-offset\tA\tA-offset\tA-coref\tB\t"
         "B-offset\tB-coref\tURL\n";
  for (const auto& r : rows) {
    const auto p_off = r.text.find(r.pronoun);
    const auto a_off = r.text.find(r.a);
    const auto b_off = r.text.find(r.b);
    REQUIRE(p_off != std::string::npos);
    REQUIRE(a_off != std::string::npos);
    REQUIRE(b_off != std::string::npos);
    out << r.id << '\t' << r.text << '\t' << r.pronoun << '\t' << p_off
        << '\t' << r.a << '\t' << a_off << '\t'
        << (r.a_coref ? "TRUE" : "FALSE") << '\t' << r.b << '\t' << b_off
        << '\t' << (r.b_coref ? "TRUE" : "FALSE") << "\thttp://x\n";
  }
  return out.str();
}

const std::vector<GapRow> kRows = {
    {"dev-1", "Olaf praised Ingrid because her work was flawless.", "her",
     "Olaf", "Ingrid", false, true},
    {"dev-2", "When Marcus visited Lena he carried flowers.", "he", "Marcus",
     "Lena", true, false},
    {"dev-3", "Petra told Nadia that she had won the race.", "she", "Petra",
     "Nadia", false, false},
    {"dev-4", "Viktor thanked Boris although his car had broken down.", "his",
     "Viktor", "Boris", true, false},
};

}  // namespace

TEST_CASE("pronoun offset points at exactly the pronoun surface") {
  const auto examples = parse_gap_string(make_tsv(kRows), "inline");
  REQUIRE(examples.size() == 4);
  const GapExample& ex = examples[0];
  CHECK(ex.text.substr(ex.pronoun_chars.begin, ex.pronoun_chars.length()) ==
        "her");
  CHECK(ex.text.substr(ex.candidate_a_chars.begin,
                       ex.candidate_a_chars.length()) == "Olaf");
}

TEST_CASE("both candidate labels can be false") {
  const auto examples = parse_gap_string(make_tsv(kRows), "inline");
  CHECK(!examples[2].a_is_coreferent);
  CHECK(!examples[2].b_is_coreferent);
}

TEST_CASE("gender partition of the fixture is (2,2)") {
  const auto examples = parse_gap_string(make_tsv(kRows), "inline");
  int masc = 0, fem = 0;
  for (const auto& ex : examples)
    (ex.pronoun_gender == PronounGender::masculine ? masc : fem)++;
  CHECK(masc == 2);
  CHECK(fem == 2);
}

TEST_CASE("offset/text mismatch names the example id") {
  std::string tsv =
      "ID\tText\tPronoun\tPronoun-offset\tA\tA-offset\tA-coref\tB\t"
      "B-offset\tB-coref\tURL\n"
      "bad-7\tShort text.\ther\t3\tAnn\t0\tTRUE\tBea\t6\tFALSE\thttp://x\n";
  CHECK_THROWS_WITH_AS(parse_gap_string(tsv, "inline"),
                       doctest::Contains("bad-7"), ParseError);
}

TEST_CASE("gap_to_document produces aligned word spans") {
  const auto examples = parse_gap_string(make_tsv(kRows), "inline");
  const GapDocument gd = gap_to_document(examples[0]);
  CHECK(gd.doc.span_text(gd.pronoun) == "her");
  CHECK(gd.doc.span_text(gd.candidate_a) == "Olaf");
  CHECK(gd.doc.span_text(gd.candidate_b) == "Ingrid");
  CHECK(gd.doc.n_sentences() >= 1);
}

TEST_CASE("pronoun gender derivation covers the standard forms") {
  CHECK(gender_of_pronoun("he") == PronounGender::masculine);
  CHECK(gender_of_pronoun("His") == PronounGender::masculine);
  CHECK(gender_of_pronoun("she") == PronounGender::feminine);
  CHECK(gender_of_pronoun("Hers") == PronounGender::feminine);
}
