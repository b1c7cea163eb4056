#ifndef SPANCOREF_PREPROCESS_HPP
#define SPANCOREF_PREPROCESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "spancoref/types.hpp"

namespace coref {

// What an augmented-sequence piece stands for. Speaker names are real
// vocabulary tokens; only the bracketing tags are special markers.
enum class PieceKind { word, speaker_name, special_tag };

struct Piece {
  std::string text;
  PieceKind kind = PieceKind::word;
  int word_index = -1;      // original word, only for kind == word
  int sentence_index = -1;  // carried over for words, -1 otherwise
};

// A document with speaker names spliced into the token stream, plus the
// maps between original word indices and augmented positions.
struct AugmentedSequence {
  std::vector<Piece> pieces;
  std::vector<int> orig_to_aug;  // word_index -> augmented position
  // augmented position -> word_index, or -1 for inserted pieces
  std::vector<int> aug_to_orig;

  int size() const { return static_cast<int>(pieces.size()); }

  // True when the word span maps to a contiguous augmented interval
  // (i.e. no inserted pieces inside it).
  bool span_is_contiguous(const Span& word_span) const;
};

struct SpeakerTagConfig {
  std::string open = "<speaker>";
  std::string close = "</speaker>";
};

// Inserts <speaker> name </speaker> before each maximal run of tokens
// sharing a speaker. Documents without speakers come back with identity
// maps. Multi-word speaker names are split on whitespace.
AugmentedSequence insert_speakers(const Document& doc,
                                  const SpeakerTagConfig& tags = {});

// A sliding window over a sequence of some length. owned_range is the
// half-open interval of positions for which this window provides the
// maximum-context representation; it may be empty for trailing windows.
struct Window {
  int start = 0;
  int length = 0;          // piece count, <= T
  int owned_begin = 0;     // half-open [owned_begin, owned_end)
  int owned_end = 0;

  int end() const { return start + length; }  // exclusive
  bool covers(int p) const { return start <= p && p < end(); }
};

// Windows of size T starting every T/2 positions (the last may be
// shorter). T must be even and >= 2, else ConfigError. Ownership: position
// p belongs to the covering window maximizing min(p - start, end - p)
// (end exclusive), ties to the earlier window; the owned ranges partition
// [0, sequence_length) exactly.
std::vector<Window> make_windows(int sequence_length, int T);

// Same construction with an explicit stride (1 <= stride <= window_size);
// used for query-context chunking where the capacity need not be even.
std::vector<Window> make_windows_stride(int sequence_length, int window_size,
                                        int stride);

// The ownership rule as a standalone function (also the test oracle's
// definition): index of the covering window with maximal centrality.
int owner_window(const std::vector<Window>& windows, int position);

// Merges per-window vector sequences into one sequence over all positions,
// taking each position's vectors from its owning window. VecSeq must
// support size() and operator[]; rows are copied.
template <typename Row>
std::vector<Row> merge_windows(
    const std::vector<Window>& windows,
    const std::vector<std::vector<Row>>& per_window_rows) {
  if (windows.size() != per_window_rows.size())
    throw ContractViolation("merge_windows: window/rows count mismatch");
  int total = 0;
  for (const Window& w : windows) total = std::max(total, w.end());
  std::vector<Row> out(total);
  std::vector<bool> filled(total, false);
  for (size_t wi = 0; wi < windows.size(); ++wi) {
    const Window& w = windows[wi];
    if (static_cast<int>(per_window_rows[wi].size()) != w.length)
      throw ContractViolation(
          "merge_windows: vector sequence length != window piece count");
    for (int p = w.owned_begin; p < w.owned_end; ++p) {
      out[p] = per_window_rows[wi][p - w.start];
      filled[p] = true;
    }
  }
  for (int p = 0; p < total; ++p)
    if (!filled[p])
      throw ContractViolation("merge_windows: owned_range coverage violation");
  return out;
}

}  // namespace coref

#endif
