#include "spancoref/mention_linking.hpp"

#include <algorithm>

#include "spancoref/mention_proposal.hpp"

namespace coref {

using nn::Graph;
using nn::Var;

void LinkingConfig::validate() const {
  if (max_span_length < 1)
    throw ConfigError("linking: max_span_length must be >= 1");
  if (antecedent_cap < 1)
    throw ConfigError("linking: antecedent_cap must be >= 1");
  if (lambda_mix < 0.0 || lambda_mix > 1.0)
    throw ConfigError("linking: lambda_mix must be in [0, 1]");
  if (chunk_stride < 0)
    throw ConfigError("linking: chunk_stride must be >= 0");
}

PairScore combine_pair(const Span& i, const Span& j, double forward,
                       double backward, double mention_i, double mention_j,
                       double lambda_mix) {
  PairScore p;
  p.i = i;
  p.j = j;
  p.forward = forward;
  p.backward = backward;
  p.bidirectional = (forward + backward) / 2.0;
  p.overall = lambda_mix * (mention_i + mention_j) +
              (1.0 - lambda_mix) * p.bidirectional;
  return p;
}

std::vector<Span> prune_candidates(const std::map<Span, double>& scores,
                                   int C) {
  if (C < 1) throw ContractViolation("prune_candidates: C must be >= 1");
  std::vector<std::pair<Span, double>> items(scores.begin(), scores.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<Span> out;
  for (const auto& [span, score] : items) {
    if (static_cast<int>(out.size()) >= C) break;
    out.push_back(span);
  }
  return out;
}

MentionLinker::MentionLinker(int hidden_dim, nn::ParamStore& store,
                             std::mt19937_64& init_rng,
                             const std::string& prefix)
    : hidden_dim_(hidden_dim) {
  w1_ = store.create(prefix + "w1", 2 * hidden_dim, hidden_dim);
  nn::init_normal(w1_->value, init_rng, 0.02);
  b1_ = store.create(prefix + "b1", 1, hidden_dim);
  w2_ = store.create(prefix + "w2", hidden_dim, 1);
  nn::init_normal(w2_->value, init_rng, 0.02);
  b2_ = store.create(prefix + "b2", 1, 1);
  speaker_feature_ = store.create(prefix + "speaker_feature", 1, 1);
}

MentionQuery MentionLinker::build_query(const DocContext& ctx,
                                        const Vocabulary& vocab,
                                        const Span& span,
                                        bool include_speaker_prefix) const {
  const Document& doc = *ctx.doc;
  if (span.start < 0 || span.end >= doc.n_words() || span.start > span.end)
    throw ContractViolation("build_query: span out of document bounds");

  // Covering sentence range (a single sentence in the usual case).
  const Span first_sent = doc.sentence_span(span.start);
  const Span last_sent = doc.sentence_span(span.end);

  int aug_begin = ctx.aug_of_word(first_sent.start);
  const int aug_end = ctx.aug_of_word(last_sent.end) + 1;
  if (include_speaker_prefix) {
    // Pull in a directly adjacent speaker block, if the sentence opens one.
    while (aug_begin > 0 &&
           ctx.aug.pieces[aug_begin - 1].kind != PieceKind::word)
      --aug_begin;
  }

  MentionQuery q;
  q.source_span = span;
  q.sentence_aug_begin = aug_begin;
  q.sentence_aug_end = aug_end;

  const int open_before = ctx.aug_of_word(span.start);
  const int close_after = ctx.aug_of_word(span.end);
  for (int a = aug_begin; a < aug_end; ++a) {
    if (a == open_before) q.piece_texts.push_back(vocab.specials().mention_open);
    q.piece_texts.push_back(ctx.aug.pieces[a].text);
    if (a == close_after) q.piece_texts.push_back(vocab.specials().mention_close);
  }
  for (const std::string& text : q.piece_texts) {
    const auto ids = vocab.tokenize_word(text);
    q.piece_ids.insert(q.piece_ids.end(), ids.begin(), ids.end());
  }
  return q;
}

std::map<Span, double> MentionLinker::QueryScores::as_map() const {
  std::map<Span, double> out;
  for (const auto& [span, row] : index) out[span] = values[row];
  return out;
}

MentionLinker::QueryScores MentionLinker::forward_scores_raw(
    Graph& g, const TransformerEncoder& encoder,
    const std::vector<int>& query_piece_ids, const DocContext& ctx,
    const LinkingConfig& cfg, int sep_id, const Span* exclude) const {
  cfg.validate();
  const int T = encoder.config().max_positions;
  const int capacity = T - static_cast<int>(query_piece_ids.size()) - 1;
  if (capacity < 2)
    throw ContractViolation(
        "forward_scores: query occupies the whole window (" +
        std::to_string(query_piece_ids.size()) + " pieces, T = " +
        std::to_string(T) + ")");

  const int flat_len = ctx.flat_size();
  const int stride = cfg.chunk_stride > 0
                         ? std::min(cfg.chunk_stride, capacity)
                         : std::max(1, capacity / 2);
  const auto chunks = make_windows_stride(flat_len, capacity, stride);

  // Assign each candidate span to the chunk owning its start position,
  // falling back to the first chunk that fully contains it.
  const auto universe =
      MentionProposer::span_universe(ctx, cfg.max_span_length,
                                     /*sentence_bounded=*/false);
  std::vector<std::vector<Span>> plan(chunks.size());
  for (const Span& s : universe) {
    if (exclude && s == *exclude) continue;
    const int first = ctx.first_flat_of_word(s.start);
    const int last = ctx.last_flat_of_word(s.end);
    const int owner = owner_window(chunks, first);
    int chosen = -1;
    if (last < chunks[owner].end()) {
      chosen = owner;
    } else {
      for (size_t c = 0; c < chunks.size(); ++c) {
        if (chunks[c].covers(first) && last < chunks[c].end()) {
          chosen = static_cast<int>(c);
          break;
        }
      }
    }
    if (chosen >= 0) plan[chosen].push_back(s);
  }

  QueryScores out;
  std::vector<Var> chunk_scores;
  for (size_t c = 0; c < chunks.size(); ++c) {
    if (plan[c].empty()) continue;  // also skips never-owning chunks
    const Window& w = chunks[c];
    const std::vector<int> context_ids(ctx.toks.piece_ids.begin() + w.start,
                                       ctx.toks.piece_ids.begin() + w.end());
    const PackedSequence packed =
        make_packed(query_piece_ids, context_ids, sep_id, T);

    Var encoded = encoder.encode_packed(g, packed);
    std::vector<int> first_rows, last_rows;
    first_rows.reserve(plan[c].size());
    last_rows.reserve(plan[c].size());
    for (const Span& s : plan[c]) {
      first_rows.push_back(packed.context_offset +
                           ctx.first_flat_of_word(s.start) - w.start);
      last_rows.push_back(packed.context_offset +
                          ctx.last_flat_of_word(s.end) - w.start);
      out.spans.push_back(s);
      out.chunk_start.push_back(w.start);
    }
    Var pair = g.concat_cols({g.gather_rows(encoded, first_rows),
                              g.gather_rows(encoded, last_rows)});
    Var h = g.gelu(g.add_bias(g.matmul(pair, g.param(w1_)), g.param(b1_)));
    chunk_scores.push_back(
        g.add_bias(g.matmul(h, g.param(w2_)), g.param(b2_)));
  }
  if (chunk_scores.empty())
    throw ContractViolation("forward_scores: no candidate spans fit a chunk");
  out.scores = chunk_scores.size() == 1 ? chunk_scores[0]
                                        : g.concat_rows(chunk_scores);
  for (size_t r = 0; r < out.spans.size(); ++r)
    out.index[out.spans[r]] = static_cast<int>(r);
  const nn::Matrix& vals = g.value(out.scores);
  out.values.assign(vals.data.begin(), vals.data.end());
  return out;
}

MentionLinker::QueryScores MentionLinker::forward_scores(
    Graph& g, const TransformerEncoder& encoder, const MentionQuery& query,
    const DocContext& ctx, const LinkingConfig& cfg, int sep_id) const {
  QueryScores out = forward_scores_raw(g, encoder, query.piece_ids, ctx, cfg,
                                       sep_id, &query.source_span);
  out.source_span = query.source_span;
  return out;
}

}  // namespace coref
