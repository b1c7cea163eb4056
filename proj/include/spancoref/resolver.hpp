#ifndef SPANCOREF_RESOLVER_HPP
#define SPANCOREF_RESOLVER_HPP

#include <string>
#include <vector>

#include "spancoref/gap.hpp"
#include "spancoref/metrics.hpp"
#include "spancoref/model.hpp"
#include "spancoref/slates.hpp"

namespace coref {

// Everything computed for one document inside one graph: the proposal
// result plus one scored slate per proposed mention. Training keeps the
// graph alive to backpropagate; prediction reads the plain slates.
struct DocumentBuild {
  DocContext ctx;
  MentionProposer::Result proposal;
  std::vector<CandidateSlate> slates;
  // Graph handles parallel to `slates`: (k+1) x 1 score columns with the
  // dummy last. Only meaningful while the originating graph is alive.
  std::vector<nn::Var> slate_scores;
  std::vector<std::vector<PairScore>> pair_details;  // per slate
};

struct EpochMetrics {
  double loss = 0.0;           // mean per-document total loss
  double linking_loss = 0.0;   // mean marginal-likelihood component
  double proposal_loss = 0.0;  // mean weighted proposal component
  double mention_recall = 0.0; // proposal recall, mean over documents
  double slate_accuracy = 0.0; // argmax-in-gold rate over slates
  int steps = 0;
};

struct QaEpochMetrics {
  double loss = 0.0;
  double exact_match = 0.0;
};

struct EvalSummary {
  double conll_avg_f1 = 0.0;
  double muc_f1 = 0.0;
  double b_cubed_f1 = 0.0;
  double ceaf_f1 = 0.0;
  double proposal_recall = 0.0;
};

// Wires a model to documents: shared logic of training, prediction and the
// analysis harnesses. Scoring is deterministic given parameters and seed.
class Resolver {
 public:
  explicit Resolver(CorefModel& model) : model_(&model) {}

  // Full scoring pass over one document (evaluation mode).
  DocumentBuild score_document(const Document& doc) const;
  ClusterSet predict(const Document& doc) const;
  std::vector<ClusterSet> predict_all(const std::vector<Document>& docs) const;

  // One pass of joint training: marginal linking loss plus the weighted
  // proposal term, one optimizer step per document. Throws DivergenceError
  // on non-finite loss.
  EpochMetrics train_epoch(const std::vector<Document>& corpus,
                           nn::AdamOptimizer& opt, uint64_t epoch_seed);

  // Proposal-only pretraining epoch.
  EpochMetrics pretrain_proposal_epoch(const std::vector<Document>& corpus,
                                       nn::AdamOptimizer& opt,
                                       uint64_t epoch_seed);

  // QA-augmentation pretraining: each example is a (question, context)
  // pair trained with the marginal loss over its answer spans (the dummy
  // for unanswerable questions). update_encoder=false freezes "enc.".
  QaEpochMetrics qa_pretrain_epoch(const std::vector<QaExample>& corpus,
                                   nn::AdamOptimizer& opt, uint64_t epoch_seed,
                                   bool update_encoder = true);
  QaEpochMetrics qa_evaluate(const std::vector<QaExample>& corpus) const;

  // Predicts every document and scores against gold clusters.
  EvalSummary evaluate(const std::vector<Document>& docs) const;

  // Runs the resolver on one GAP example and reads off, by span overlap
  // with the decoded clusters, whether the pronoun corefers with each
  // candidate name.
  GapPrediction predict_gap(const GapExample& ex) const;

  // Gold rows for one slate under a document's gold clustering (the dummy
  // row when the query is not a gold mention or no coreferent candidate
  // survived pruning).
  static std::vector<int> gold_rows_for_slate(const Document& doc,
                                              const CandidateSlate& slate);

  // Shared with the training path; public for tests that need graph
  // handles (gradient-flow probes).
  DocumentBuild build_document(nn::Graph& g, const Document& doc) const;

 private:
  CorefModel* model_;
};

}  // namespace coref

#endif
