#include "spancoref/doc_context.hpp"

namespace coref {

SpeakerStrategy speaker_strategy_from_string(const std::string& s) {
  if (s == "input") return SpeakerStrategy::input;
  if (s == "feature") return SpeakerStrategy::feature;
  if (s == "none") return SpeakerStrategy::none;
  throw ConfigError("unknown speaker strategy: " + s);
}

std::string to_string(SpeakerStrategy s) {
  switch (s) {
    case SpeakerStrategy::input: return "input";
    case SpeakerStrategy::feature: return "feature";
    case SpeakerStrategy::none: return "none";
  }
  return "?";
}

AugmentedSequence augment_identity(const Document& doc) {
  AugmentedSequence seq;
  seq.orig_to_aug.resize(doc.n_words());
  for (const Token& tok : doc.tokens) {
    seq.orig_to_aug[tok.word_index] = seq.size();
    seq.aug_to_orig.push_back(tok.word_index);
    seq.pieces.push_back(
        {tok.text, PieceKind::word, tok.word_index, tok.sentence_index});
  }
  return seq;
}

DocContext DocContext::build(const Document& doc, const Vocabulary& vocab,
                             SpeakerStrategy strategy) {
  DocContext ctx;
  ctx.doc = &doc;
  if (strategy == SpeakerStrategy::input) {
    SpeakerTagConfig tags;
    tags.open = vocab.specials().speaker_open;
    tags.close = vocab.specials().speaker_close;
    ctx.aug = insert_speakers(doc, tags);
  } else {
    ctx.aug = augment_identity(doc);
  }
  ctx.toks = tokenize_sequence(vocab, ctx.aug);
  return ctx;
}

}  // namespace coref
