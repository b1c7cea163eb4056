#include "spancoref/preprocess.hpp"

#include <algorithm>
#include <sstream>

namespace coref {

bool AugmentedSequence::span_is_contiguous(const Span& word_span) const {
  if (word_span.start < 0 ||
      word_span.end >= static_cast<int>(orig_to_aug.size()))
    return false;
  return orig_to_aug[word_span.end] - orig_to_aug[word_span.start] ==
         word_span.end - word_span.start;
}

AugmentedSequence insert_speakers(const Document& doc,
                                  const SpeakerTagConfig& tags) {
  AugmentedSequence seq;
  seq.orig_to_aug.resize(doc.n_words(), -1);

  auto push_word = [&seq](const Token& tok) {
    seq.orig_to_aug[tok.word_index] = seq.size();
    seq.aug_to_orig.push_back(tok.word_index);
    seq.pieces.push_back(
        {tok.text, PieceKind::word, tok.word_index, tok.sentence_index});
  };
  auto push_inserted = [&seq](const std::string& text, PieceKind kind) {
    seq.aug_to_orig.push_back(-1);
    seq.pieces.push_back({text, kind, -1, -1});
  };

  int w = 0;
  const int n = doc.n_words();
  while (w < n) {
    const auto& speaker = doc.tokens[w].speaker;
    int run_end = w;
    while (run_end + 1 < n && doc.tokens[run_end + 1].speaker == speaker)
      ++run_end;
    if (speaker.has_value()) {
      push_inserted(tags.open, PieceKind::special_tag);
      std::istringstream iss(*speaker);
      std::string name_piece;
      while (iss >> name_piece)
        push_inserted(name_piece, PieceKind::speaker_name);
      push_inserted(tags.close, PieceKind::special_tag);
    }
    for (int k = w; k <= run_end; ++k) push_word(doc.tokens[k]);
    w = run_end + 1;
  }
  return seq;
}

std::vector<Window> make_windows(int sequence_length, int T) {
  if (T < 2 || T % 2 != 0)
    throw ConfigError("window size T must be even and >= 2, got " +
                      std::to_string(T));
  return make_windows_stride(sequence_length, T, T / 2);
}

std::vector<Window> make_windows_stride(int sequence_length, int window_size,
                                        int stride) {
  if (window_size < 1)
    throw ConfigError("window size must be >= 1, got " +
                      std::to_string(window_size));
  if (stride < 1 || stride > window_size)
    throw ConfigError("window stride must be in [1, window_size], got " +
                      std::to_string(stride));
  if (sequence_length <= 0)
    throw ContractViolation("make_windows: empty sequence");

  std::vector<Window> windows;
  for (int start = 0; start < sequence_length; start += stride) {
    Window w;
    w.start = start;
    w.length = std::min(window_size, sequence_length - start);
    windows.push_back(w);
  }
  // Ownership sweep: positions are owned in window order, so each window's
  // owned set is one contiguous interval.
  std::vector<int> owner(sequence_length);
  for (int p = 0; p < sequence_length; ++p) {
    owner[p] = owner_window(windows, p);
    if (p > 0 && owner[p] < owner[p - 1])
      throw ContractViolation("make_windows: ownership is not monotone");
  }
  for (auto& w : windows) {
    w.owned_begin = 0;
    w.owned_end = 0;
  }
  int p = 0;
  while (p < sequence_length) {
    int q = p;
    while (q < sequence_length && owner[q] == owner[p]) ++q;
    windows[owner[p]].owned_begin = p;
    windows[owner[p]].owned_end = q;
    p = q;
  }
  return windows;
}

int owner_window(const std::vector<Window>& windows, int position) {
  int best = -1;
  int best_margin = -1;
  for (size_t wi = 0; wi < windows.size(); ++wi) {
    const Window& w = windows[wi];
    if (!w.covers(position)) continue;
    const int margin = std::min(position - w.start, w.end() - position);
    if (margin > best_margin) {  // ties keep the earlier window
      best_margin = margin;
      best = static_cast<int>(wi);
    }
  }
  if (best < 0)
    throw ContractViolation("owner_window: position not covered");
  return best;
}

}  // namespace coref
