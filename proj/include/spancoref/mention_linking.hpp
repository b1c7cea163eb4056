#ifndef SPANCOREF_MENTION_LINKING_HPP
#define SPANCOREF_MENTION_LINKING_HPP

#include <map>
#include <random>
#include <string>
#include <vector>

#include "spancoref/doc_context.hpp"
#include "spancoref/encoder.hpp"
#include "spancoref/nn/graph.hpp"
#include "spancoref/nn/params.hpp"
#include "spancoref/types.hpp"

namespace coref {

struct LinkingConfig {
  int max_span_length = 10;  // answer span width cap (L)
  int antecedent_cap = 50;   // C, candidates kept per query
  double lambda_mix = 0.5;   // mention-score vs answer-score tradeoff
  int chunk_stride = 0;      // 0 -> half the chunk capacity
  bool query_includes_speaker = true;

  void validate() const;
};

// A mention's sentence with marker tags around the mention, ready to be
// packed in front of a context chunk.
struct MentionQuery {
  Span source_span;
  int sentence_aug_begin = 0;  // [begin, end) slice of the augmented stream
  int sentence_aug_end = 0;
  std::vector<std::string> piece_texts;  // tagged pieces, word level
  std::vector<int> piece_ids;            // flat word-piece ids
};

struct PairScore {
  Span i, j;
  double forward = 0.0;        // j answers the query built from i
  double backward = 0.0;       // i answers the query built from j
  double bidirectional = 0.0;  // (forward + backward) / 2
  double overall = 0.0;        // mix of mention scores and bidirectional
};

// Pure combination rule shared by the graph and the reporting path.
PairScore combine_pair(const Span& i, const Span& j, double forward,
                       double backward, double mention_i, double mention_j,
                       double lambda_mix);

// Top-C spans by forward score, ties broken by (start, end) ascending.
std::vector<Span> prune_candidates(const std::map<Span, double>& scores,
                                   int C);

// Span-prediction head over packed query+context encodings. One parameter
// set serves both query directions.
class MentionLinker {
 public:
  MentionLinker(int hidden_dim, nn::ParamStore& store,
                std::mt19937_64& init_rng,
                const std::string& prefix = "head.answer.");

  MentionQuery build_query(const DocContext& ctx, const Vocabulary& vocab,
                           const Span& span,
                           bool include_speaker_prefix = true) const;

  // Forward scores of every width-<=L candidate span in the document under
  // one query. Long documents are chunked; a span is scored in the chunk
  // that owns its start (falling back to the first chunk containing it).
  // The query's own source span is excluded.
  struct QueryScores {
    Span source_span;
    std::vector<Span> spans;        // scored candidates
    std::map<Span, int> index;      // span -> row in `scores`
    std::vector<int> chunk_start;   // per span: start of the scoring chunk
    nn::Var scores;                 // |spans| x 1
    std::vector<double> values;     // snapshot of `scores`
    std::map<Span, double> as_map() const;
  };
  QueryScores forward_scores(nn::Graph& g, const TransformerEncoder& encoder,
                             const MentionQuery& query, const DocContext& ctx,
                             const LinkingConfig& cfg, int sep_id) const;

  // Same scoring machinery for free-text queries (QA pretraining).
  QueryScores forward_scores_raw(nn::Graph& g,
                                 const TransformerEncoder& encoder,
                                 const std::vector<int>& query_piece_ids,
                                 const DocContext& ctx,
                                 const LinkingConfig& cfg, int sep_id,
                                 const Span* exclude = nullptr) const;

  // Trainable weight of the same-speaker pair feature (baseline speaker
  // strategy); nullptr-free, created at construction.
  nn::Parameter* speaker_feature_weight() const { return speaker_feature_; }

 private:
  int hidden_dim_;
  nn::Parameter *w1_, *b1_, *w2_, *b2_;
  nn::Parameter* speaker_feature_;
};

}  // namespace coref

#endif
