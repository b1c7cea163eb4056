#ifndef SPANCOREF_DOC_CONTEXT_HPP
#define SPANCOREF_DOC_CONTEXT_HPP

#include "spancoref/preprocess.hpp"
#include "spancoref/types.hpp"
#include "spancoref/vocab.hpp"

namespace coref {

// How speaker information enters the model. `input` splices speaker names
// into the token stream; `feature` keeps the stream plain and adds a
// same-speaker pair feature to the overall score; `none` ignores speakers.
enum class SpeakerStrategy { input, feature, none };

SpeakerStrategy speaker_strategy_from_string(const std::string& s);
std::string to_string(SpeakerStrategy s);

// Identity augmentation: document words only, no inserted pieces.
AugmentedSequence augment_identity(const Document& doc);

// Everything derived from one document that scoring needs: the augmented
// piece stream and its word-piece expansion, with alignment accessors.
struct DocContext {
  const Document* doc = nullptr;
  AugmentedSequence aug;
  TokenizedSequence toks;

  static DocContext build(const Document& doc, const Vocabulary& vocab,
                          SpeakerStrategy strategy);

  int aug_of_word(int w) const { return aug.orig_to_aug.at(w); }
  int first_flat_of_word(int w) const {
    return toks.first_flat.at(aug_of_word(w));
  }
  int last_flat_of_word(int w) const {
    return toks.last_flat.at(aug_of_word(w));
  }
  bool contiguous(const Span& s) const { return aug.span_is_contiguous(s); }
  int flat_size() const { return toks.size(); }
};

}  // namespace coref

#endif
