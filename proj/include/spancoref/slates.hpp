#ifndef SPANCOREF_SLATES_HPP
#define SPANCOREF_SLATES_HPP

#include <vector>

#include "spancoref/types.hpp"

namespace coref {

// One query mention's pruned candidate list plus the dummy "no coreferent
// mention" option. The dummy is always present, exactly once, as the LAST
// entry of overall_scores with its score fixed at 0.
struct CandidateSlate {
  Span query_span;
  std::vector<Span> candidates;        // <= C, (start, end) ascending
  std::vector<double> overall_scores;  // candidates.size() + 1 entries

  int dummy_row() const { return static_cast<int>(candidates.size()); }
  void validate() const;
};

// Softmax over the overall scores (dummy included); sums to 1 within 1e-12
// and is invariant under a per-slate constant shift.
std::vector<double> slate_distribution(const CandidateSlate& slate);

// -log sum_{j in gold_rows} P(j). gold_rows index overall_scores; callers
// map "no coreferent candidate" to {dummy_row()} before calling.
double marginal_loss_value(const CandidateSlate& slate,
                           const std::vector<int>& gold_rows);

// The row the decoder follows for this slate: argmax probability, with the
// dummy winning ties and earlier (start, end) candidates winning among
// equal non-dummy scores.
int best_row(const CandidateSlate& slate);

// Max-edge graph decoding: each slate contributes one undirected edge from
// its query span to its best candidate, unless the best option is the
// dummy. Connected components of size >= 2 become clusters; clusters and
// their members come out sorted by (start, end).
ClusterSet decode_clusters(const std::vector<CandidateSlate>& slates);

}  // namespace coref

#endif
