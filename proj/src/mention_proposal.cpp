#include "spancoref/mention_proposal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace coref {

using nn::Graph;
using nn::Var;

void ProposalConfig::validate() const {
  if (max_span_length < 1)
    throw ConfigError("proposal: max_span_length must be >= 1");
  if (keep_ratio <= 0.0 || keep_ratio > 1.0)
    throw ConfigError("proposal: keep_ratio must be in (0, 1]");
  if (negative_ratio < 0.0)
    throw ConfigError("proposal: negative_ratio must be >= 0");
}

int keep_count(double keep_ratio, int n_words) {
  const int k =
      static_cast<int>(std::ceil(keep_ratio * n_words - 1e-9));
  return std::max(1, k);
}

MentionProposer::MentionProposer(int hidden_dim, nn::ParamStore& store,
                                 std::mt19937_64& init_rng,
                                 const std::string& prefix)
    : hidden_dim_(hidden_dim) {
  const double w_std = 0.02;
  auto weight = [&](const std::string& name, int rows, int cols) {
    nn::Parameter* p = store.create(prefix + name, rows, cols);
    nn::init_normal(p->value, init_rng, w_std);
    return p;
  };
  auto zeros = [&](const std::string& name, int rows, int cols) {
    return store.create(prefix + name, rows, cols);
  };
  start_w1_ = weight("start.w1", hidden_dim, hidden_dim);
  start_b1_ = zeros("start.b1", 1, hidden_dim);
  start_w2_ = weight("start.w2", hidden_dim, 1);
  start_b2_ = zeros("start.b2", 1, 1);
  end_w1_ = weight("end.w1", hidden_dim, hidden_dim);
  end_b1_ = zeros("end.b1", 1, hidden_dim);
  end_w2_ = weight("end.w2", hidden_dim, 1);
  end_b2_ = zeros("end.b2", 1, 1);
  span_w1_ = weight("span.w1", 2 * hidden_dim, hidden_dim);
  span_b1_ = zeros("span.b1", 1, hidden_dim);
  span_w2_ = weight("span.w2", hidden_dim, 1);
  span_b2_ = zeros("span.b2", 1, 1);
}

Var MentionProposer::head(Graph& g, Var input, nn::Parameter* w1,
                          nn::Parameter* b1, nn::Parameter* w2,
                          nn::Parameter* b2) const {
  Var h = g.gelu(g.add_bias(g.matmul(input, g.param(w1)), g.param(b1)));
  return g.add_bias(g.matmul(h, g.param(w2)), g.param(b2));
}

MentionProposer::BoundaryScores MentionProposer::score_boundaries(
    Graph& g, Var encoded, const DocContext& ctx) const {
  const int n = ctx.doc->n_words();
  std::vector<int> first_rows(n), last_rows(n);
  for (int w = 0; w < n; ++w) {
    first_rows[w] = ctx.first_flat_of_word(w);
    last_rows[w] = ctx.last_flat_of_word(w);
  }
  BoundaryScores out;
  out.start_logits = head(g, g.gather_rows(encoded, first_rows), start_w1_,
                          start_b1_, start_w2_, start_b2_);
  out.end_logits = head(g, g.gather_rows(encoded, last_rows), end_w1_,
                        end_b1_, end_w2_, end_b2_);

  const double neg_inf = -std::numeric_limits<double>::infinity();
  out.start_over_augmented.assign(ctx.aug.size(), neg_inf);
  out.end_over_augmented.assign(ctx.aug.size(), neg_inf);
  for (int w = 0; w < n; ++w) {
    const int a = ctx.aug_of_word(w);
    out.start_over_augmented[a] = g.value(out.start_logits).at(w, 0);
    out.end_over_augmented[a] = g.value(out.end_logits).at(w, 0);
  }
  return out;
}

Var MentionProposer::score_spans(Graph& g, Var encoded, const DocContext& ctx,
                                 const std::vector<Span>& spans,
                                 int max_span_length) const {
  if (spans.empty())
    throw ContractViolation("score_spans: empty span list");
  std::vector<int> first_rows, last_rows;
  first_rows.reserve(spans.size());
  last_rows.reserve(spans.size());
  for (const Span& s : spans) {
    if (s.width() > max_span_length)
      throw ContractViolation("score_spans: span exceeds max_span_length");
    if (s.start < 0 || s.end >= ctx.doc->n_words() || s.start > s.end)
      throw ContractViolation("score_spans: span out of document bounds");
    first_rows.push_back(ctx.first_flat_of_word(s.start));
    last_rows.push_back(ctx.last_flat_of_word(s.end));
  }
  Var pair = g.concat_cols({g.gather_rows(encoded, first_rows),
                            g.gather_rows(encoded, last_rows)});
  return head(g, pair, span_w1_, span_b1_, span_w2_, span_b2_);
}

std::vector<Span> MentionProposer::span_universe(const DocContext& ctx,
                                                 int max_span_length,
                                                 bool sentence_bounded) {
  std::vector<Span> out;
  const int n = ctx.doc->n_words();
  for (int s = 0; s < n; ++s) {
    const int sent = ctx.doc->tokens[s].sentence_index;
    for (int e = s; e < std::min(n, s + max_span_length); ++e) {
      if (sentence_bounded && ctx.doc->tokens[e].sentence_index != sent) break;
      const Span span(s, e);
      if (!ctx.contiguous(span)) continue;  // crosses inserted pieces
      out.push_back(span);
    }
  }
  return out;
}

MentionProposer::Result MentionProposer::propose(Graph& g, Var encoded,
                                                 const DocContext& ctx,
                                                 const ProposalConfig& cfg) const {
  cfg.validate();
  Result r;
  r.universe = span_universe(ctx, cfg.max_span_length, /*sentence_bounded=*/false);
  for (size_t i = 0; i < r.universe.size(); ++i)
    r.universe_index[r.universe[i]] = static_cast<int>(i);

  r.boundaries = score_boundaries(g, encoded, ctx);
  r.span_logits = score_spans(g, encoded, ctx, r.universe, cfg.max_span_length);

  std::vector<int> start_rows, end_rows;
  start_rows.reserve(r.universe.size());
  end_rows.reserve(r.universe.size());
  for (const Span& s : r.universe) {
    start_rows.push_back(s.start);
    end_rows.push_back(s.end);
  }
  Var summed = g.add(g.add(g.gather_rows(r.boundaries.start_logits, start_rows),
                           g.gather_rows(r.boundaries.end_logits, end_rows)),
                     r.span_logits);
  r.mention_logits = g.div_scalar(summed, 3.0);

  // Rank the proposable subset (sentence-bounded unless configured off).
  std::vector<MentionScore> scored;
  scored.reserve(r.universe.size());
  const auto& starts = g.value(r.boundaries.start_logits);
  const auto& ends = g.value(r.boundaries.end_logits);
  const auto& joints = g.value(r.span_logits);
  const auto& avg = g.value(r.mention_logits);
  for (size_t i = 0; i < r.universe.size(); ++i) {
    const Span s = r.universe[i];
    if (!cfg.cross_sentence_spans &&
        ctx.doc->tokens[s.start].sentence_index !=
            ctx.doc->tokens[s.end].sentence_index)
      continue;
    MentionScore ms;
    ms.span = s;
    ms.start_score = starts.at(s.start, 0);
    ms.end_score = ends.at(s.end, 0);
    ms.joint_score = joints.at(static_cast<int>(i), 0);
    ms.mention_score = avg.at(static_cast<int>(i), 0);
    scored.push_back(ms);
  }
  std::sort(scored.begin(), scored.end(),
            [](const MentionScore& a, const MentionScore& b) {
              if (a.mention_score != b.mention_score)
                return a.mention_score > b.mention_score;
              if (a.span.start != b.span.start) return a.span.start < b.span.start;
              return a.span.end < b.span.end;
            });
  const int k = std::min(static_cast<int>(scored.size()),
                         keep_count(cfg.keep_ratio, ctx.doc->n_words()));
  r.kept.assign(scored.begin(), scored.begin() + k);
  return r;
}

Var MentionProposer::mention_logit_for(Graph& g, const Result& result,
                                       const Span& span) const {
  auto it = result.universe_index.find(span);
  if (it == result.universe_index.end())
    throw ContractViolation("mention_logit_for: span not in scored universe");
  return g.gather_rows(result.mention_logits, {it->second});
}

Var MentionProposer::pretrain_loss(Graph& g, const Result& result,
                                   const DocContext& ctx,
                                   const std::vector<Span>& gold_mentions,
                                   const ProposalConfig& cfg,
                                   std::mt19937_64& rng) const {
  const int n = ctx.doc->n_words();
  std::set<int> gold_starts, gold_ends;
  std::set<Span> gold_set;
  for (const Span& s : gold_mentions) {
    gold_starts.insert(s.start);
    gold_ends.insert(s.end);
    gold_set.insert(s);
  }
  std::vector<double> start_labels(n, 0.0), end_labels(n, 0.0);
  for (int w : gold_starts) start_labels[w] = 1.0;
  for (int w : gold_ends) end_labels[w] = 1.0;

  Var loss = g.add(g.bce_with_logits(result.boundaries.start_logits,
                                     std::move(start_labels)),
                   g.bce_with_logits(result.boundaries.end_logits,
                                     std::move(end_labels)));

  // Span term: all positives, negatives subsampled.
  std::vector<int> positives, negatives;
  for (size_t i = 0; i < result.universe.size(); ++i) {
    if (gold_set.count(result.universe[i]))
      positives.push_back(static_cast<int>(i));
    else
      negatives.push_back(static_cast<int>(i));
  }
  const size_t keep_neg = std::min(
      negatives.size(),
      static_cast<size_t>(std::ceil(
          cfg.negative_ratio * std::max<size_t>(1, positives.size()))));
  std::shuffle(negatives.begin(), negatives.end(), rng);
  negatives.resize(keep_neg);

  std::vector<int> selected = positives;
  selected.insert(selected.end(), negatives.begin(), negatives.end());
  std::sort(selected.begin(), selected.end());
  if (!selected.empty()) {
    std::vector<double> labels;
    labels.reserve(selected.size());
    for (int i : selected)
      labels.push_back(gold_set.count(result.universe[i]) ? 1.0 : 0.0);
    loss = g.add(loss, g.bce_with_logits(
                           g.gather_rows(result.span_logits, selected),
                           std::move(labels)));
  }
  return loss;
}

}  // namespace coref
