#include "spancoref/resolver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "spancoref/metrics.hpp"

namespace coref {

using nn::Graph;
using nn::Var;

namespace {

std::vector<Span> gold_mentions_of(const Document& doc) {
  std::vector<Span> out;
  for (const auto& cluster : doc.gold_clusters)
    out.insert(out.end(), cluster.begin(), cluster.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::map<Span, int> gold_cluster_of(const Document& doc) {
  std::map<Span, int> out;
  for (size_t c = 0; c < doc.gold_clusters.size(); ++c)
    for (const Span& s : doc.gold_clusters[c]) out[s] = static_cast<int>(c);
  return out;
}

bool same_speaker(const Document& doc, const Span& a, const Span& b) {
  const auto& sa = doc.tokens[a.start].speaker;
  const auto& sb = doc.tokens[b.start].speaker;
  return sa.has_value() && sb.has_value() && *sa == *sb;
}

}  // namespace

DocumentBuild Resolver::build_document(Graph& g, const Document& doc) const {
  const CorefModel& m = *model_;
  const ModelConfig& cfg = m.config();
  if (doc.n_words() == 0)
    throw ContractViolation("build_document: empty document " + doc.doc_key);

  DocumentBuild out;
  out.ctx = DocContext::build(doc, m.vocab(), cfg.speaker_strategy);

  const DocumentEncoding enc =
      encode_document(g, m.encoder(), out.ctx.toks, cfg.window_size);
  out.proposal = m.proposer().propose(g, enc.merged, out.ctx, cfg.proposal);

  if (out.proposal.universe.size() < 2) return out;  // nothing to link

  // Query encodings are shared between the forward direction of a proposed
  // mention and the backward direction of any pair pointing at it.
  std::map<Span, MentionLinker::QueryScores> query_cache;
  auto scores_for = [&](const Span& s) -> MentionLinker::QueryScores& {
    auto it = query_cache.find(s);
    if (it != query_cache.end()) return it->second;
    const MentionQuery q = m.linker().build_query(
        out.ctx, m.vocab(), s, cfg.linking.query_includes_speaker);
    auto res = m.linker().forward_scores(g, m.encoder(), q, out.ctx,
                                         cfg.linking, m.vocab().sep_id());
    return query_cache.emplace(s, std::move(res)).first->second;
  };

  const double lambda = cfg.linking.lambda_mix;
  for (const MentionScore& mention : out.proposal.kept) {
    const Span qspan = mention.span;
    auto& fwd = scores_for(qspan);
    std::vector<Span> pruned =
        prune_candidates(fwd.as_map(), cfg.linking.antecedent_cap);
    std::sort(pruned.begin(), pruned.end());

    CandidateSlate slate;
    slate.query_span = qspan;
    std::vector<Var> rows;
    std::vector<PairScore> details;
    Var query_mention_logit = m.proposer().mention_logit_for(
        g, out.proposal, qspan);
    for (const Span& cand : pruned) {
      Var fscore = g.gather_rows(fwd.scores, {fwd.index.at(cand)});
      auto& bwd = scores_for(cand);
      auto bit = bwd.index.find(qspan);
      // The query span always sits in the scored universe; the lookup can
      // only miss if it fits no chunk, in which case the forward score
      // stands in for both directions.
      Var bscore = bit != bwd.index.end()
                       ? g.gather_rows(bwd.scores, {bit->second})
                       : fscore;
      Var bid = g.div_scalar(g.add(fscore, bscore), 2.0);
      Var cand_mention_logit =
          m.proposer().mention_logit_for(g, out.proposal, cand);
      Var overall =
          g.add(g.scale(g.add(query_mention_logit, cand_mention_logit), lambda),
                g.scale(bid, 1.0 - lambda));
      if (cfg.speaker_strategy == SpeakerStrategy::feature &&
          same_speaker(doc, qspan, cand))
        overall = g.add(overall, g.param(m.linker().speaker_feature_weight()));
      rows.push_back(overall);

      PairScore ps = combine_pair(
          qspan, cand, g.scalar(fscore), g.scalar(bscore),
          g.scalar(query_mention_logit), g.scalar(cand_mention_logit), lambda);
      ps.overall = g.scalar(overall);  // includes the speaker feature term
      details.push_back(ps);
      slate.candidates.push_back(cand);
      slate.overall_scores.push_back(g.scalar(overall));
    }
    rows.push_back(g.scalar_input(0.0));  // the dummy option, score fixed
    slate.overall_scores.push_back(0.0);

    out.slate_scores.push_back(g.concat_rows(rows));
    out.slates.push_back(std::move(slate));
    out.pair_details.push_back(std::move(details));
  }
  return out;
}

DocumentBuild Resolver::score_document(const Document& doc) const {
  Graph g(/*training=*/false);
  return build_document(g, doc);
}

ClusterSet Resolver::predict(const Document& doc) const {
  if (doc.n_words() == 0) return {};
  Graph g(/*training=*/false);
  const DocumentBuild build = build_document(g, doc);
  return decode_clusters(build.slates);
}

std::vector<ClusterSet> Resolver::predict_all(
    const std::vector<Document>& docs) const {
  std::vector<ClusterSet> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) out.push_back(predict(doc));
  return out;
}

std::vector<int> Resolver::gold_rows_for_slate(const Document& doc,
                                               const CandidateSlate& slate) {
  const auto cluster_of = gold_cluster_of(doc);
  std::vector<int> gold;
  auto qit = cluster_of.find(slate.query_span);
  if (qit != cluster_of.end()) {
    for (size_t i = 0; i < slate.candidates.size(); ++i) {
      auto cit = cluster_of.find(slate.candidates[i]);
      if (cit != cluster_of.end() && cit->second == qit->second)
        gold.push_back(static_cast<int>(i));
    }
  }
  if (gold.empty()) gold.push_back(slate.dummy_row());
  return gold;
}

EpochMetrics Resolver::train_epoch(const std::vector<Document>& corpus,
                                   nn::AdamOptimizer& opt,
                                   uint64_t epoch_seed) {
  CorefModel& m = *model_;
  std::mt19937_64 rng(epoch_seed);
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  EpochMetrics metrics;
  double recall_sum = 0.0;
  long slate_hits = 0, slate_total = 0;
  for (size_t idx : order) {
    const Document& doc = corpus[idx];
    if (doc.n_words() == 0) continue;
    Graph g(/*training=*/true, /*dropout_seed=*/epoch_seed ^ (idx * 0x9e3779b9ULL));
    m.store().zero_grads();

    DocumentBuild build = build_document(g, doc);

    std::vector<std::vector<int>> gold_rows;
    Var aux = g.scale(
        m.proposer().pretrain_loss(g, build.proposal, build.ctx,
                                   gold_mentions_of(doc), m.config().proposal,
                                   rng),
        m.config().aux_proposal_weight);
    Var total = aux;
    for (size_t s = 0; s < build.slates.size(); ++s) {
      gold_rows.push_back(gold_rows_for_slate(doc, build.slates[s]));
      total = g.add(total, g.marginal_nll(build.slate_scores[s], gold_rows[s]));
    }

    const double loss_value = g.scalar(total);
    if (!std::isfinite(loss_value))
      throw DivergenceError("training diverged on document " + doc.doc_key +
                            " (loss = " + std::to_string(loss_value) + ")");
    g.backward(total);
    opt.step();
    metrics.proposal_loss += g.scalar(aux);
    metrics.linking_loss += loss_value - g.scalar(aux);

    for (size_t s = 0; s < build.slates.size(); ++s) {
      const int best = best_row(build.slates[s]);
      if (std::find(gold_rows[s].begin(), gold_rows[s].end(), best) !=
          gold_rows[s].end())
        ++slate_hits;
      ++slate_total;
    }

    metrics.loss += loss_value;
    std::vector<Span> proposed;
    for (const auto& ms : build.proposal.kept) proposed.push_back(ms.span);
    recall_sum += mention_recall(gold_mentions_of(doc), proposed);
    ++metrics.steps;
  }
  if (metrics.steps > 0) {
    metrics.loss /= metrics.steps;
    metrics.linking_loss /= metrics.steps;
    metrics.proposal_loss /= metrics.steps;
    metrics.mention_recall = recall_sum / metrics.steps;
  }
  metrics.slate_accuracy =
      slate_total > 0 ? static_cast<double>(slate_hits) / slate_total : 0.0;
  return metrics;
}

EpochMetrics Resolver::pretrain_proposal_epoch(
    const std::vector<Document>& corpus, nn::AdamOptimizer& opt,
    uint64_t epoch_seed) {
  CorefModel& m = *model_;
  std::mt19937_64 rng(epoch_seed);
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  EpochMetrics metrics;
  double recall_sum = 0.0;
  for (size_t idx : order) {
    const Document& doc = corpus[idx];
    if (doc.n_words() == 0) continue;
    Graph g(/*training=*/true, epoch_seed ^ (idx * 0x9e3779b9ULL));
    m.store().zero_grads();

    DocContext ctx =
        DocContext::build(doc, m.vocab(), m.config().speaker_strategy);
    const DocumentEncoding enc =
        encode_document(g, m.encoder(), ctx.toks, m.config().window_size);
    auto proposal =
        m.proposer().propose(g, enc.merged, ctx, m.config().proposal);
    Var loss = m.proposer().pretrain_loss(g, proposal, ctx,
                                          gold_mentions_of(doc),
                                          m.config().proposal, rng);
    const double loss_value = g.scalar(loss);
    if (!std::isfinite(loss_value))
      throw DivergenceError("proposal pretraining diverged on document " +
                            doc.doc_key);
    g.backward(loss);
    opt.step();

    metrics.loss += loss_value;
    std::vector<Span> proposed;
    for (const auto& ms : proposal.kept) proposed.push_back(ms.span);
    recall_sum += mention_recall(gold_mentions_of(doc), proposed);
    ++metrics.steps;
  }
  if (metrics.steps > 0) {
    metrics.loss /= metrics.steps;
    metrics.mention_recall = recall_sum / metrics.steps;
  }
  return metrics;
}

namespace {

// A QA example as a context document plus gold answer word spans.
struct QaInstance {
  Document doc;
  std::vector<int> question_ids;
  std::vector<Span> answers;
};

QaInstance make_qa_instance(const QaExample& ex, const Vocabulary& vocab) {
  QaInstance inst;
  const auto toks = simple_tokenize(ex.context);
  const auto sents = simple_sentence_index(toks);
  inst.doc.doc_key = "qa/" + ex.id + "_000";
  inst.doc.genre = "qa";
  for (size_t t = 0; t < toks.size(); ++t) {
    Token tok;
    tok.text = toks[t].text;
    tok.word_index = static_cast<int>(t);
    tok.sentence_index = sents[t];
    inst.doc.tokens.push_back(std::move(tok));
  }
  for (const auto& ans : ex.answers) {
    inst.answers.push_back(char_span_to_words(
        toks, ans.start, ans.start + static_cast<int>(ans.text.size()),
        "QA example " + ex.id));
  }
  std::sort(inst.answers.begin(), inst.answers.end());
  inst.answers.erase(std::unique(inst.answers.begin(), inst.answers.end()),
                     inst.answers.end());
  for (const auto& qt : simple_tokenize(ex.question)) {
    const auto ids = vocab.tokenize_word(qt.text);
    inst.question_ids.insert(inst.question_ids.end(), ids.begin(), ids.end());
  }
  if (inst.question_ids.empty()) inst.question_ids.push_back(vocab.unk_id());
  return inst;
}

}  // namespace

QaEpochMetrics Resolver::qa_pretrain_epoch(const std::vector<QaExample>& corpus,
                                           nn::AdamOptimizer& opt,
                                           uint64_t epoch_seed,
                                           bool update_encoder) {
  CorefModel& m = *model_;
  std::vector<bool> frozen_before;
  for (const auto& p : m.store().params()) frozen_before.push_back(p->frozen);
  if (!update_encoder) m.store().freeze_prefix("enc.", true);

  std::mt19937_64 rng(epoch_seed);
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  QaEpochMetrics metrics;
  long em_hits = 0;
  for (size_t idx : order) {
    const QaExample& ex = corpus[idx];
    const QaInstance inst = make_qa_instance(ex, m.vocab());
    if (inst.doc.n_words() == 0) continue;

    Graph g(/*training=*/true, epoch_seed ^ (idx * 0x9e3779b9ULL));
    m.store().zero_grads();

    DocContext ctx = DocContext::build(inst.doc, m.vocab(),
                                       SpeakerStrategy::none);
    auto fwd = m.linker().forward_scores_raw(g, m.encoder(), inst.question_ids,
                                             ctx, m.config().linking,
                                             m.vocab().sep_id());
    std::vector<Span> pruned =
        prune_candidates(fwd.as_map(), m.config().linking.antecedent_cap);
    std::sort(pruned.begin(), pruned.end());

    CandidateSlate slate;
    slate.query_span = Span(0, 0);  // placeholder; QA queries have no span
    std::vector<Var> rows;
    for (const Span& cand : pruned) {
      rows.push_back(g.gather_rows(fwd.scores, {fwd.index.at(cand)}));
      slate.candidates.push_back(cand);
      slate.overall_scores.push_back(fwd.values[fwd.index.at(cand)]);
    }
    rows.push_back(g.scalar_input(0.0));
    slate.overall_scores.push_back(0.0);
    Var scores = g.concat_rows(rows);

    std::vector<int> gold;
    for (size_t i = 0; i < slate.candidates.size(); ++i)
      for (const Span& ans : inst.answers)
        if (slate.candidates[i] == ans) gold.push_back(static_cast<int>(i));
    if (gold.empty()) gold.push_back(slate.dummy_row());

    Var loss = g.marginal_nll(scores, gold);
    const double loss_value = g.scalar(loss);
    if (!std::isfinite(loss_value))
      throw DivergenceError("QA pretraining diverged on example " + ex.id);
    g.backward(loss);
    opt.step();
    metrics.loss += loss_value;

    const int best = best_row(slate);
    const bool hit =
        inst.answers.empty()
            ? best == slate.dummy_row()
            : (best < slate.dummy_row() &&
               std::find(inst.answers.begin(), inst.answers.end(),
                         slate.candidates[best]) != inst.answers.end());
    if (hit) ++em_hits;
  }
  if (!corpus.empty()) {
    metrics.loss /= static_cast<double>(corpus.size());
    metrics.exact_match = static_cast<double>(em_hits) / corpus.size();
  }
  for (size_t i = 0; i < frozen_before.size(); ++i)
    m.store().params()[i]->frozen = frozen_before[i];
  return metrics;
}

QaEpochMetrics Resolver::qa_evaluate(const std::vector<QaExample>& corpus) const {
  CorefModel& m = *model_;
  QaEpochMetrics metrics;
  long em_hits = 0;
  for (const QaExample& ex : corpus) {
    const QaInstance inst = make_qa_instance(ex, m.vocab());
    if (inst.doc.n_words() == 0) continue;
    Graph g(/*training=*/false);
    DocContext ctx =
        DocContext::build(inst.doc, m.vocab(), SpeakerStrategy::none);
    auto fwd = m.linker().forward_scores_raw(g, m.encoder(), inst.question_ids,
                                             ctx, m.config().linking,
                                             m.vocab().sep_id());
    std::vector<Span> pruned =
        prune_candidates(fwd.as_map(), m.config().linking.antecedent_cap);
    std::sort(pruned.begin(), pruned.end());
    CandidateSlate slate;
    for (const Span& cand : pruned) {
      slate.candidates.push_back(cand);
      slate.overall_scores.push_back(fwd.values[fwd.index.at(cand)]);
    }
    slate.overall_scores.push_back(0.0);
    std::vector<int> gold;
    for (size_t i = 0; i < slate.candidates.size(); ++i)
      for (const Span& ans : inst.answers)
        if (slate.candidates[i] == ans) gold.push_back(static_cast<int>(i));
    if (gold.empty()) gold.push_back(slate.dummy_row());
    metrics.loss += marginal_loss_value(slate, gold);
    const int best = best_row(slate);
    const bool hit =
        inst.answers.empty()
            ? best == slate.dummy_row()
            : (best < slate.dummy_row() &&
               std::find(inst.answers.begin(), inst.answers.end(),
                         slate.candidates[best]) != inst.answers.end());
    if (hit) ++em_hits;
  }
  if (!corpus.empty()) {
    metrics.loss /= static_cast<double>(corpus.size());
    metrics.exact_match = static_cast<double>(em_hits) / corpus.size();
  }
  return metrics;
}

GapPrediction Resolver::predict_gap(const GapExample& ex) const {
  const GapDocument gd = gap_to_document(ex);
  const ClusterSet decoded = predict(gd.doc);
  auto linked = [&decoded](const Span& a, const Span& b) {
    for (const auto& cluster : decoded.clusters) {
      bool has_a = false, has_b = false;
      for (const Span& s : cluster) {
        if (s.overlaps(a)) has_a = true;
        if (s.overlaps(b)) has_b = true;
      }
      if (has_a && has_b) return true;
    }
    return false;
  };
  GapPrediction pred;
  pred.a_coreferent = linked(gd.pronoun, gd.candidate_a);
  pred.b_coreferent = linked(gd.pronoun, gd.candidate_b);
  return pred;
}

EvalSummary Resolver::evaluate(const std::vector<Document>& docs) const {
  CorefEvaluator evaluator;
  double recall_sum = 0.0;
  for (const Document& doc : docs) {
    if (doc.n_words() == 0) {
      evaluator.add_document(doc.gold_clusters, {});
      continue;
    }
    Graph g(/*training=*/false);
    const DocumentBuild build = build_document(g, doc);
    const ClusterSet pred = decode_clusters(build.slates);
    evaluator.add_document(doc.gold_clusters, pred.clusters);
    std::vector<Span> proposed;
    for (const auto& ms : build.proposal.kept) proposed.push_back(ms.span);
    recall_sum += mention_recall(gold_mentions_of(doc), proposed);
  }
  const MetricReport report = evaluator.report();
  EvalSummary out;
  out.conll_avg_f1 = report.conll_avg_f1;
  out.muc_f1 = report.muc.f1;
  out.b_cubed_f1 = report.b_cubed.f1;
  out.ceaf_f1 = report.ceaf_phi4.f1;
  out.proposal_recall = docs.empty() ? 0.0 : recall_sum / docs.size();
  return out;
}

}  // namespace coref
