#ifndef SPANCOREF_VOCAB_HPP
#define SPANCOREF_VOCAB_HPP

#include <map>
#include <string>
#include <vector>

#include "spancoref/preprocess.hpp"
#include "spancoref/types.hpp"

namespace coref {

// Marker strings spliced into token streams. These are reserved vocabulary
// entries, initialized like any other embedding row.
struct SpecialTokens {
  std::string speaker_open = "<speaker>";
  std::string speaker_close = "</speaker>";
  std::string mention_open = "<mention>";
  std::string mention_close = "</mention>";
};

// Word-piece vocabulary built from a training corpus. In-vocabulary words
// map to a single piece; everything else falls back to character pieces
// ("##"-prefixed continuations). Unknown characters map to [UNK], which is
// the one lossy case of detokenize.
//
// The file format is one piece per line; ids are line numbers. The first
// lines are reserved: [PAD] [UNK] [CLS] [SEP], the four marker strings,
// then [unused0]..[unused3].
class Vocabulary {
 public:
  static Vocabulary build(const std::vector<std::string>& words,
                          const SpecialTokens& specials = {},
                          size_t max_words = 50000);

  // Convenience: collect token texts and speaker-name words from documents.
  static std::vector<std::string> collect_words(
      const std::vector<Document>& docs);

  int size() const { return static_cast<int>(pieces_.size()); }
  int piece_id(const std::string& piece) const;  // -1 if absent
  const std::string& piece(int id) const { return pieces_.at(id); }

  // Piece ids for one word; never empty. The markers themselves tokenize
  // to their reserved single pieces.
  std::vector<int> tokenize_word(const std::string& word) const;
  std::string detokenize(const std::vector<int>& ids) const;

  int pad_id() const { return 0; }
  int unk_id() const { return 1; }
  int cls_id() const { return 2; }
  int sep_id() const { return 3; }
  int speaker_open_id() const { return 4; }
  int speaker_close_id() const { return 5; }
  int mention_open_id() const { return 6; }
  int mention_close_id() const { return 7; }
  const SpecialTokens& specials() const { return specials_; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> pieces_;
  std::map<std::string, int> id_of_;
  SpecialTokens specials_;

  void index();
};

// Word-piece expansion of an augmented sequence, with alignment maps in
// both directions. Span scoring uses the FIRST piece of the start word and
// the LAST piece of the end word.
struct TokenizedSequence {
  std::vector<int> piece_ids;    // flat piece ids
  std::vector<int> aug_of_flat;  // flat index -> augmented position
  std::vector<int> first_flat;   // augmented position -> first flat index
  std::vector<int> last_flat;    // augmented position -> last flat index

  int size() const { return static_cast<int>(piece_ids.size()); }
};

TokenizedSequence tokenize_sequence(const Vocabulary& vocab,
                                    const AugmentedSequence& seq);

}  // namespace coref

#endif
