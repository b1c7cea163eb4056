#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "grad_check.hpp"
#include "spancoref/encoder.hpp"
#include "spancoref/mention_proposal.hpp"

using namespace coref;
using nn::Graph;
using nn::Matrix;
using nn::ParamStore;
using nn::Var;

namespace {

struct Bench {
  Vocabulary vocab;
  ParamStore store;
  std::unique_ptr<TransformerEncoder> encoder;
  std::unique_ptr<MentionProposer> proposer;
  Document doc;
  DocContext ctx;
  Graph graph;
  Var encoded;

  explicit Bench(const std::vector<std::vector<std::string>>& sentences,
                 uint64_t seed = 1)
      : vocab(Vocabulary::build(flatten(sentences))) {
    std::mt19937_64 rng(seed);
    EncoderConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.hidden_dim = 16;
    cfg.num_layers = 1;
    cfg.num_heads = 2;
    cfg.ffn_dim = 24;
    cfg.max_positions = 64;
    encoder = std::make_unique<TransformerEncoder>(cfg, store, rng);
    proposer = std::make_unique<MentionProposer>(16, store, rng);

    doc.doc_key = "t/bench_000";
    int sent = 0;
    for (const auto& words : sentences) {
      for (const auto& w : words) {
        Token tok;
        tok.text = w;
        tok.word_index = doc.n_words();
        tok.sentence_index = sent;
        doc.tokens.push_back(tok);
      }
      ++sent;
    }
    ctx = DocContext::build(doc, vocab, SpeakerStrategy::none);
    encoded = encode_document(graph, *encoder, ctx.toks, 64).merged;
  }

  static std::vector<std::string> flatten(
      const std::vector<std::vector<std::string>>& sentences) {
    std::vector<std::string> out;
    for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
};

void zero_heads(ParamStore& store) {
  for (const auto& p : store.params())
    if (p->name.rfind("head.", 0) == 0) p->value.fill(0.0);
}

}  // namespace

TEST_CASE("keep_count uses a representation-tolerant ceiling") {
  CHECK(keep_count(0.2, 50) == 10);
  CHECK(keep_count(0.2, 51) == 11);
  CHECK(keep_count(0.5, 10) == 5);
  CHECK(keep_count(1.0, 7) == 7);
  CHECK(keep_count(0.01, 3) == 1);  // clamped to at least one
}

TEST_CASE("zero-weight heads give every position the bias score") {
  Bench b({{"a", "b", "c", "d"}});
  zero_heads(b.store);
  b.store.require("head.mention.start.b2")->value.data[0] = 0.25;
  const auto scores =
      b.proposer->score_boundaries(b.graph, b.encoded, b.ctx);
  const Matrix& starts = b.graph.value(scores.start_logits);
  for (int w = 0; w < 4; ++w) CHECK(starts.at(w, 0) == doctest::Approx(0.25));
}

TEST_CASE("inserted pieces carry -inf boundary scores") {
  Document d;
  d.doc_key = "t/spk_000";
  for (int i = 0; i < 3; ++i) {
    Token tok;
    tok.text = "word";
    tok.word_index = i;
    tok.speaker = i % 2 == 0 ? "Ann" : "Ben";  // three one-word turns
    d.tokens.push_back(tok);
  }
  const Vocabulary vocab = Vocabulary::build({"word", "Ann", "Ben"});
  std::mt19937_64 rng(3);
  ParamStore store;
  EncoderConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.hidden_dim = 16;
  cfg.num_layers = 1;
  cfg.num_heads = 2;
  cfg.ffn_dim = 16;
  cfg.max_positions = 32;
  TransformerEncoder enc(cfg, store, rng);
  MentionProposer prop(16, store, rng);
  const DocContext ctx = DocContext::build(d, vocab, SpeakerStrategy::input);
  Graph g;
  Var encoded = encode_document(g, enc, ctx.toks, 32).merged;
  const auto scores = prop.score_boundaries(g, encoded, ctx);
  REQUIRE(scores.start_over_augmented.size() == static_cast<size_t>(ctx.aug.size()));
  for (int a = 0; a < ctx.aug.size(); ++a) {
    if (ctx.aug.pieces[a].kind == PieceKind::word) {
      CHECK(std::isfinite(scores.start_over_augmented[a]));
    } else {
      CHECK(std::isinf(scores.start_over_augmented[a]));
      CHECK(scores.start_over_augmented[a] < 0);
    }
  }

  // No candidate span may cross inserted pieces.
  ProposalConfig pcfg;
  pcfg.max_span_length = 3;
  pcfg.keep_ratio = 1.0;
  const auto result = prop.propose(g, encoded, ctx, pcfg);
  for (const Span& s : result.universe) CHECK(ctx.contiguous(s));
}

TEST_CASE("width-1 spans get finite joint scores from doubled endpoints") {
  Bench b({{"a", "b", "c"}});
  const Var joint =
      b.proposer->score_spans(b.graph, b.encoded, b.ctx, {Span(1, 1)}, 5);
  CHECK(std::isfinite(b.graph.scalar(joint)));
}

TEST_CASE("spans sharing endpoints share their joint score") {
  // The joint head sees only the endpoint vectors, so two calls for the
  // same span agree bit-exactly.
  Bench b({{"a", "b", "c", "d", "e"}});
  const Var s1 =
      b.proposer->score_spans(b.graph, b.encoded, b.ctx, {Span(1, 3)}, 5);
  const Var s2 =
      b.proposer->score_spans(b.graph, b.encoded, b.ctx, {Span(1, 3)}, 5);
  CHECK(b.graph.scalar(s1) == b.graph.scalar(s2));
}

TEST_CASE("overlength span is a contract violation") {
  Bench b({{"a", "b", "c", "d", "e"}});
  CHECK_THROWS_AS(
      b.proposer->score_spans(b.graph, b.encoded, b.ctx, {Span(0, 4)}, 3),
      ContractViolation);
}

TEST_CASE("mention score is exactly the average of the three parts") {
  Bench b({{"a", "b", "c", "d", "e", "f"}, {"g", "h", "c"}});
  ProposalConfig cfg;
  cfg.max_span_length = 3;
  cfg.keep_ratio = 1.0;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  REQUIRE(!result.kept.empty());
  for (const MentionScore& ms : result.kept) {
    CHECK(ms.mention_score ==
          (ms.start_score + ms.end_score + ms.joint_score) / 3);
  }
}

TEST_CASE("propose keeps exactly ceil(keep_ratio * n) spans") {
  std::vector<std::string> words(50, "w");
  Bench b({words});
  ProposalConfig cfg;
  cfg.max_span_length = 4;
  cfg.keep_ratio = 0.2;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  CHECK(result.kept.size() == 10);
}

TEST_CASE("zero-weight heads fall back to tie-break order") {
  std::vector<std::string> words(50, "w");
  Bench b({words});
  zero_heads(b.store);
  ProposalConfig cfg;
  cfg.max_span_length = 4;
  cfg.keep_ratio = 0.2;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  REQUIRE(result.kept.size() == 10);
  // All scores tie, so the kept list is the first ten spans in
  // (start, end) ascending order.
  std::vector<Span> expected;
  for (int s = 0; expected.size() < 10; ++s)
    for (int e = s; e < std::min(50, s + 4) && expected.size() < 10; ++e)
      expected.push_back(Span(s, e));
  for (size_t i = 0; i < 10; ++i) CHECK(result.kept[i].span == expected[i]);
}

TEST_CASE("shifting every head output by a constant keeps the kept set") {
  Bench b({{"a", "b", "c", "d", "e", "f", "g", "h"}});
  ProposalConfig cfg;
  cfg.max_span_length = 3;
  cfg.keep_ratio = 0.4;
  const auto before = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);

  for (const char* bias :
       {"head.mention.start.b2", "head.mention.end.b2", "head.mention.span.b2"})
    b.store.require(bias)->value.data[0] += 2.5;
  Graph g2;
  Var encoded2 = encode_document(g2, *b.encoder, b.ctx.toks, 64).merged;
  const auto after = b.proposer->propose(g2, encoded2, b.ctx, cfg);

  REQUIRE(before.kept.size() == after.kept.size());
  for (size_t i = 0; i < before.kept.size(); ++i) {
    CHECK(before.kept[i].span == after.kept[i].span);
    CHECK(after.kept[i].mention_score ==
          doctest::Approx(before.kept[i].mention_score + 2.5));
  }
}

TEST_CASE("sentence-bounded proposal skips crossing spans") {
  Bench b({{"a", "b"}, {"c", "d"}});
  ProposalConfig cfg;
  cfg.max_span_length = 4;
  cfg.keep_ratio = 1.0;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  for (const auto& ms : result.kept) {
    CHECK(b.doc.tokens[ms.span.start].sentence_index ==
          b.doc.tokens[ms.span.end].sentence_index);
  }
  // The scored universe still contains the crossing spans for lookups.
  CHECK(result.universe_index.count(Span(1, 2)) == 1);
}

TEST_CASE("propose agrees with a brute-force enumeration oracle") {
  Bench b({{"a", "b", "c", "d", "e", "f"}, {"g", "h", "a", "c"}}, 21);
  ProposalConfig cfg;
  cfg.max_span_length = 3;
  cfg.keep_ratio = 0.3;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);

  // Independent oracle: enumerate sentence-bounded candidates, average the
  // three scores itself, and sort with its own comparator.
  const Matrix& starts = b.graph.value(result.boundaries.start_logits);
  const Matrix& ends = b.graph.value(result.boundaries.end_logits);
  const Matrix& joints = b.graph.value(result.span_logits);
  struct Row {
    Span span;
    double score;
  };
  std::vector<Row> oracle;
  for (size_t i = 0; i < result.universe.size(); ++i) {
    const Span s = result.universe[i];
    if (b.doc.tokens[s.start].sentence_index !=
        b.doc.tokens[s.end].sentence_index)
      continue;
    const double sm = (starts.at(s.start, 0) + ends.at(s.end, 0) +
                       joints.at(static_cast<int>(i), 0)) /
                      3;
    oracle.push_back({s, sm});
  }
  std::sort(oracle.begin(), oracle.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.span < b.span;
  });
  const size_t k = result.kept.size();
  CHECK(k == static_cast<size_t>(keep_count(cfg.keep_ratio, 10)));
  for (size_t i = 0; i < k; ++i) {
    CHECK(result.kept[i].span == oracle[i].span);
    CHECK(result.kept[i].mention_score == oracle[i].score);
  }
}

TEST_CASE("proposal pretrain loss matches a scalar BCE oracle") {
  Bench b({{"a", "b", "c", "d", "e", "f", "g", "h"}});
  ProposalConfig cfg;
  cfg.max_span_length = 2;
  cfg.keep_ratio = 1.0;
  cfg.negative_ratio = 1e9;  // keep all negatives so the oracle is exact
  const std::vector<Span> gold = {Span(1, 2), Span(4, 4)};
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  std::mt19937_64 rng(9);
  const Var loss =
      b.proposer->pretrain_loss(b.graph, result, b.ctx, gold, cfg, rng);

  auto bce = [](double logit, double label) {
    return std::max(logit, 0.0) - logit * label +
           std::log1p(std::exp(-std::fabs(logit)));
  };
  const Matrix& starts = b.graph.value(result.boundaries.start_logits);
  const Matrix& ends = b.graph.value(result.boundaries.end_logits);
  const Matrix& joints = b.graph.value(result.span_logits);
  double oracle = 0.0;
  for (int w = 0; w < 8; ++w) {
    oracle += bce(starts.at(w, 0), w == 1 || w == 4 ? 1.0 : 0.0);
    oracle += bce(ends.at(w, 0), w == 2 || w == 4 ? 1.0 : 0.0);
  }
  for (size_t i = 0; i < result.universe.size(); ++i) {
    const bool is_gold = result.universe[i] == gold[0] ||
                         result.universe[i] == gold[1];
    oracle += bce(joints.at(static_cast<int>(i), 0), is_gold ? 1.0 : 0.0);
  }
  CHECK(b.graph.scalar(loss) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("pretrain loss at zero scores is ln 2 per label") {
  Bench b({{"a", "b", "c"}});
  zero_heads(b.store);
  ProposalConfig cfg;
  cfg.max_span_length = 1;
  cfg.keep_ratio = 1.0;
  cfg.negative_ratio = 1e9;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  std::mt19937_64 rng(9);
  const Var loss = b.proposer->pretrain_loss(b.graph, result, b.ctx,
                                             {Span(0, 0)}, cfg, rng);
  // 3 start labels + 3 end labels + 3 span labels, each ln 2.
  CHECK(b.graph.scalar(loss) ==
        doctest::Approx(9.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("zero gold mentions still yields a valid all-negative loss") {
  Bench b({{"a", "b", "c"}});
  ProposalConfig cfg;
  cfg.max_span_length = 2;
  cfg.keep_ratio = 1.0;
  const auto result = b.proposer->propose(b.graph, b.encoded, b.ctx, cfg);
  std::mt19937_64 rng(9);
  const Var loss =
      b.proposer->pretrain_loss(b.graph, result, b.ctx, {}, cfg, rng);
  CHECK(std::isfinite(b.graph.scalar(loss)));
  CHECK(b.graph.scalar(loss) > 0.0);
}

TEST_CASE("boundary and span head gradients match finite differences") {
  Bench b({{"a", "b", "c", "d"}});
  ProposalConfig cfg;
  cfg.max_span_length = 2;
  cfg.keep_ratio = 1.0;
  cfg.negative_ratio = 1e9;
  const std::vector<Span> gold = {Span(0, 1)};

  auto build = [&](Graph& g) {
    Var encoded = encode_document(g, *b.encoder, b.ctx.toks, 64).merged;
    const auto result = b.proposer->propose(g, encoded, b.ctx, cfg);
    std::mt19937_64 rng(9);
    return b.proposer->pretrain_loss(g, result, b.ctx, gold, cfg, rng);
  };
  b.store.zero_grads();
  {
    Graph g;
    g.backward(build(g));
  }
  auto eval = [&]() {
    Graph g;
    return g.scalar(build(g));
  };
  std::mt19937_64 rng(17);
  coref::testutil::GradCheck check;
  for (const auto& p : b.store.params()) {
    if (p->name.rfind("head.mention.", 0) != 0) continue;
    std::uniform_int_distribution<size_t> d(0, p->value.size() - 1);
    for (int rep = 0; rep < 2; ++rep) check.probe_param(*p, d(rng), eval);
  }
  CHECK(check.probes >= 20);
  CHECK(check.meaningful >= 10);
}
