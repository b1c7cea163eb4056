#ifndef SPANCOREF_METRICS_HPP
#define SPANCOREF_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "spancoref/types.hpp"

namespace coref {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// 0/0 -> 0; F1 is the harmonic mean (0 when P + R = 0).
PRF make_prf(double p_num, double p_den, double r_num, double r_den);

using Clusters = std::vector<std::vector<Span>>;

// Per-document scores (one-document aggregation).
PRF muc(const Clusters& gold, const Clusters& pred);
PRF b_cubed(const Clusters& gold, const Clusters& pred);
PRF ceaf_phi4(const Clusters& gold, const Clusters& pred);

struct MetricReport {
  PRF muc;
  PRF b_cubed;
  PRF ceaf_phi4;
  double conll_avg_f1 = 0.0;

  std::string to_table() const;
  std::string to_jsonl() const;  // one line-delimited record per metric
};

// Corpus-level scorer: numerators and denominators accumulate across
// documents (the official scorer's convention), not per-document averages.
class CorefEvaluator {
 public:
  void add_document(const Clusters& gold, const Clusters& pred);
  MetricReport report() const;

 private:
  double muc_rn_ = 0, muc_rd_ = 0, muc_pn_ = 0, muc_pd_ = 0;
  double b3_rn_ = 0, b3_rd_ = 0, b3_pn_ = 0, b3_pd_ = 0;
  double ceaf_phi_ = 0, ceaf_gold_ = 0, ceaf_pred_ = 0;
};

// Max-weight one-to-one assignment between rows and columns of `weight`
// (rows x cols, any rectangular shape). Returns the matched column per row
// (-1 when unmatched) and the total weight of the matching.
struct Assignment {
  std::vector<int> col_of_row;
  double total = 0.0;
};
Assignment max_weight_assignment(const std::vector<std::vector<double>>& weight);

struct GapPrediction {
  bool a_coreferent = false;
  bool b_coreferent = false;
};

struct GapReport {
  double masculine_f1 = 0.0;
  double feminine_f1 = 0.0;
  double bias = 0.0;  // feminine / masculine, 0 when masculine is 0
  double overall_f1 = 0.0;

  std::string to_table() const;
};

// F1 over the per-candidate binary coreference decisions, split by pronoun
// gender. Examples without a prediction are scored as both-false, with a
// warning.
GapReport gap_score(const std::vector<GapExample>& examples,
                    const std::map<std::string, GapPrediction>& predictions,
                    std::vector<std::string>* warnings = nullptr);

// |gold intersect proposed| / |gold|; empty gold -> 1.
double mention_recall(const std::vector<Span>& gold_mentions,
                      const std::vector<Span>& proposed);

}  // namespace coref

#endif
