#ifndef SPANCOREF_MENTION_PROPOSAL_HPP
#define SPANCOREF_MENTION_PROPOSAL_HPP

#include <map>
#include <random>
#include <string>
#include <vector>

#include "spancoref/doc_context.hpp"
#include "spancoref/nn/graph.hpp"
#include "spancoref/nn/params.hpp"
#include "spancoref/types.hpp"

namespace coref {

struct ProposalConfig {
  int max_span_length = 10;    // L
  double keep_ratio = 0.2;     // fraction of document words kept as mentions
  double negative_ratio = 3.0; // span-term negatives per positive in pretraining
  bool cross_sentence_spans = false;

  void validate() const;
};

struct MentionScore {
  Span span;
  double start_score = 0.0;
  double end_score = 0.0;
  double joint_score = 0.0;
  double mention_score = 0.0;  // (start + end + joint) / 3
};

// ceil(keep_ratio * n) with a tolerance for binary representation noise
// (0.2 * 50 must give exactly 10), clamped to at least one proposal.
int keep_count(double keep_ratio, int n_words);

// Three feed-forward heads over encoded documents: word-starts-a-mention,
// word-ends-a-mention, and span-is-a-mention over [first, last] vectors.
// Each head is two layers with a gelu, hidden width = encoder hidden_dim.
class MentionProposer {
 public:
  MentionProposer(int hidden_dim, nn::ParamStore& store,
                  std::mt19937_64& init_rng,
                  const std::string& prefix = "head.mention.");

  struct BoundaryScores {
    nn::Var start_logits;  // n_words x 1
    nn::Var end_logits;    // n_words x 1
    // Views over augmented positions: -inf at inserted (non-word) pieces.
    std::vector<double> start_over_augmented;
    std::vector<double> end_over_augmented;
  };
  BoundaryScores score_boundaries(nn::Graph& g, nn::Var encoded,
                                  const DocContext& ctx) const;

  // Batched joint scores, one row per span, in the given order. Spans must
  // be contiguous in the augmented sequence and within the length cap.
  nn::Var score_spans(nn::Graph& g, nn::Var encoded, const DocContext& ctx,
                      const std::vector<Span>& spans, int max_span_length) const;

  // All contiguous spans of width <= L, in (start, end) ascending order.
  // If sentence_bounded, spans crossing sentence boundaries are excluded.
  static std::vector<Span> span_universe(const DocContext& ctx,
                                         int max_span_length,
                                         bool sentence_bounded);

  struct Result {
    // The scored universe is NOT sentence-bounded so that linking can look
    // up a mention score for any candidate it retrieves.
    std::vector<Span> universe;
    std::map<Span, int> universe_index;
    BoundaryScores boundaries;
    nn::Var span_logits;     // |universe| x 1
    nn::Var mention_logits;  // |universe| x 1, the averaged score
    std::vector<MentionScore> kept;  // sorted by score desc, (start,end) asc
  };
  Result propose(nn::Graph& g, nn::Var encoded, const DocContext& ctx,
                 const ProposalConfig& cfg) const;

  // Pretraining objective: summed binary cross-entropy of the three
  // classifiers. Span-term negatives are subsampled to
  // negative_ratio * max(1, #positives), deterministically from `rng`.
  nn::Var pretrain_loss(nn::Graph& g, const Result& result,
                        const DocContext& ctx,
                        const std::vector<Span>& gold_mentions,
                        const ProposalConfig& cfg,
                        std::mt19937_64& rng) const;

  nn::Var mention_logit_for(nn::Graph& g, const Result& result,
                            const Span& span) const;

 private:
  int hidden_dim_;
  nn::Parameter *start_w1_, *start_b1_, *start_w2_, *start_b2_;
  nn::Parameter *end_w1_, *end_b1_, *end_w2_, *end_b2_;
  nn::Parameter *span_w1_, *span_b1_, *span_w2_, *span_b2_;

  nn::Var head(nn::Graph& g, nn::Var input, nn::Parameter* w1,
               nn::Parameter* b1, nn::Parameter* w2, nn::Parameter* b2) const;
};

}  // namespace coref

#endif
