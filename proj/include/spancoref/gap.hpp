#ifndef SPANCOREF_GAP_HPP
#define SPANCOREF_GAP_HPP

#include <string>
#include <vector>

#include "spancoref/types.hpp"

namespace coref {

// Reader for the GAP TSV release (columns: ID, Text, Pronoun,
// Pronoun-offset, A, A-offset, A-coref, B, B-offset, B-coref, URL).
// Character offsets are validated against the text.
std::vector<GapExample> parse_gap(const std::string& path);
std::vector<GapExample> parse_gap_string(const std::string& tsv,
                                         const std::string& source_name);

// Word-level view of a GAP example, for running the resolver on it.
struct GapDocument {
  Document doc;
  Span pronoun;      // word span
  Span candidate_a;  // word span
  Span candidate_b;  // word span
};
GapDocument gap_to_document(const GapExample& ex);

PronounGender gender_of_pronoun(const std::string& pronoun);

}  // namespace coref

#endif
