#ifndef SPANCOREF_SYNTHETIC_HPP
#define SPANCOREF_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spancoref/types.hpp"

namespace coref {

// Deterministic toy-corpus generator with unambiguous pronoun patterns.
//
// Narrative grammar (num_speakers = 0), one masculine and one feminine
// entity per document:
//   S0: <A> <verb> <B> <place> .
//   then alternating  <pron> <verb2> <pron> <adv> .  sentences whose
//   pronouns resolve by gender, plus mention-free filler sentences.
// Gold clusters: one per entity (its name mention plus its pronouns).
//
// Dialogue grammar (num_speakers = K >= 2): K named speakers take turns;
// each turn is "I <verb2> <OtherName> <adv> ." or "<OtherName> is busy ."
// Every "I" belongs to its speaker's cluster, every name mention to the
// named entity's cluster; resolving "I" requires the speaker identity.
// Clusters that end up with fewer than 2 mentions are dropped.
struct SyntheticConfig {
  int num_documents = 20;
  int num_speakers = 0;    // 0 -> narrative documents without speakers
  int extra_sentences = 2; // pronoun sentences after the opening
  uint64_t seed = 7;
};

std::vector<Document> generate_synthetic_corpus(const SyntheticConfig& cfg);

// SQuAD-v2-style JSON over the same grammar: per document, one answerable
// question per entity (all of its mentions as answers) and one
// unanswerable question. Usable for QA-augmentation pretraining.
std::string generate_synthetic_qa_json(const SyntheticConfig& cfg);

}  // namespace coref

#endif
