#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "grad_check.hpp"
#include "spancoref/nn/graph.hpp"
#include "spancoref/nn/params.hpp"

using namespace coref::nn;

namespace {

// The builder must return the scalar loss Var.
void finite_difference_check(ParamStore& store,
                             const std::function<Var(Graph&)>& build,
                             int probes_per_param, std::mt19937_64& rng) {
  store.zero_grads();
  {
    Graph g;
    g.backward(build(g));
  }
  auto eval = [&]() {
    Graph g;
    return g.scalar(build(g));
  };
  coref::testutil::GradCheck check;
  for (const auto& p : store.params()) {
    std::uniform_int_distribution<size_t> pick(0, p->value.size() - 1);
    for (int probe = 0; probe < probes_per_param; ++probe)
      check.probe_param(*p, pick(rng), eval);
  }
  CHECK(check.meaningful > 0);
}

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  Matrix m(r, c);
  std::normal_distribution<double> dist(0.0, scale);
  for (double& x : m.data) x = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("matmul forward values") {
  Graph g;
  Matrix a(2, 3), b(3, 2);
  a.data = {1, 2, 3, 4, 5, 6};
  b.data = {7, 8, 9, 10, 11, 12};
  const Matrix c = g.value(g.matmul(g.input(a), g.input(b)));
  CHECK(c.at(0, 0) == 58);
  CHECK(c.at(0, 1) == 64);
  CHECK(c.at(1, 0) == 139);
  CHECK(c.at(1, 1) == 154);
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  std::mt19937_64 rng(1);
  Graph g;
  Matrix m = random_matrix(4, 7, rng, 3.0);
  const Matrix s = g.value(g.softmax_rows(g.input(m)));
  for (int r = 0; r < 4; ++r) {
    double total = 0;
    for (int c = 0; c < 7; ++c) total += s.at(r, c);
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
  Matrix shifted = m;
  for (int c = 0; c < 7; ++c) shifted.at(2, c) += 123.0;
  const Matrix s2 = g.value(g.softmax_rows(g.input(shifted)));
  for (int c = 0; c < 7; ++c)
    CHECK(std::fabs(s.at(2, c) - s2.at(2, c)) < 1e-12);
}

TEST_CASE("marginal_nll matches a hand softmax oracle") {
  Graph g;
  Matrix scores(3, 1);
  scores.data = {0.0, std::log(2.0), 0.0};
  // softmax = {1/4, 2/4, 1/4}
  const Var nll = g.marginal_nll(g.input(scores), {1});
  CHECK(g.scalar(nll) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  Graph g2;
  const Var nll2 = g2.marginal_nll(g2.input(scores), {0, 1});
  CHECK(g2.scalar(nll2) == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("bce_with_logits endpoint values") {
  Graph g;
  Matrix logits(2, 1);
  logits.data = {0.0, 0.0};
  const Var loss = g.bce_with_logits(g.input(logits), {0.0, 1.0});
  CHECK(g.scalar(loss) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  Graph g2;
  Matrix sep(2, 1);
  sep.data = {40.0, -40.0};
  const Var tiny = g2.bce_with_logits(g2.input(sep), {1.0, 0.0});
  CHECK(g2.scalar(tiny) < 1e-12);
}

TEST_CASE("evaluation-mode graphs are bit-deterministic") {
  std::mt19937_64 rng(5);
  ParamStore store;
  Parameter* w = store.create("w", 6, 6);
  init_normal(w->value, rng, 0.5);
  Matrix x = random_matrix(3, 6, rng);
  auto run = [&]() {
    Graph g;
    return g.value(g.gelu(g.matmul(g.input(x), g.param(w))));
  };
  const Matrix a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("gradients match finite differences across all op types") {
  std::mt19937_64 rng(11);
  ParamStore store;
  Parameter* w1 = store.create("w1", 5, 4);
  Parameter* b1 = store.create("b1", 1, 4);
  Parameter* gain = store.create("gain", 1, 4);
  Parameter* bias = store.create("bias", 1, 4);
  Parameter* w2 = store.create("w2", 8, 1);
  Parameter* emb = store.create("emb", 7, 5);
  init_normal(w1->value, rng, 0.4);
  init_normal(b1->value, rng, 0.1);
  init_normal(w2->value, rng, 0.4);
  init_normal(emb->value, rng, 0.6);
  gain->value.fill(1.1);
  init_normal(bias->value, rng, 0.1);

  // Touches gather, matmul, add_bias, layer_norm, gelu, softmax,
  // transpose, slice, concat, merge, scale, div, sum, bce, marginal.
  auto build = [&](Graph& g) {
    Var x = g.gather_rows(g.param(emb), {0, 2, 4, 6, 1});      // 5 x 5
    Var h = g.add_bias(g.matmul(x, g.param(w1)), g.param(b1)); // 5 x 4
    h = g.layer_norm(h, g.param(gain), g.param(bias));
    Var attn = g.softmax_rows(
        g.scale(g.matmul(h, g.transpose(h)), 1.0 / 2.0));      // 5 x 5
    Var mixed = g.matmul(attn, h);                             // 5 x 4
    Var both = g.concat_cols({g.gelu(mixed), h});              // 5 x 8
    Var merged = g.merge_rows({both, both},
                              {{0, 0}, {1, 2}, {0, 4}});       // 3 x 8
    Var scores = g.matmul(merged, g.param(w2));                // 3 x 1
    Var part = g.slice_cols(g.transpose(scores), 0, 2);        // 1 x 2
    Var total = g.add(
        g.add(g.sum(part), g.div_scalar(g.sum(scores), 3.0)),
        g.add(g.bce_with_logits(scores, {1.0, 0.0, 1.0}),
              g.marginal_nll(g.concat_rows({scores, g.scalar_input(0.0)}),
                             {1, 3})));
    return total;
  };
  finite_difference_check(store, build, 6, rng);
}

TEST_CASE("backward accumulates across shared subexpressions") {
  ParamStore store;
  Parameter* w = store.create("w", 1, 1);
  w->value.data[0] = 3.0;
  Graph g;
  Var x = g.param(w);
  Var y = g.mul(x, x);  // d/dw (w^2) = 2w = 6
  g.backward(g.sum(y));
  CHECK(w->grad.data[0] == doctest::Approx(6.0));
}

TEST_CASE("dropout applies only in training mode") {
  Matrix ones(10, 10);
  ones.fill(1.0);
  Graph eval_g(false);
  const Matrix still = eval_g.value(eval_g.dropout(eval_g.input(ones), 0.5));
  for (double v : still.data) CHECK(v == 1.0);

  Graph train_g(true, 99);
  const Matrix dropped =
      train_g.value(train_g.dropout(train_g.input(ones), 0.5));
  int zeros = 0;
  for (double v : dropped.data) {
    if (v == 0.0) ++zeros;
    else CHECK(v == doctest::Approx(2.0));
  }
  CHECK(zeros > 10);
  CHECK(zeros < 90);
}

TEST_CASE("parameter store save/load restores values bit-exactly") {
  std::mt19937_64 rng(13);
  ParamStore store;
  Parameter* a = store.create("enc.a", 4, 5);
  Parameter* b = store.create("head.b", 2, 3);
  init_normal(a->value, rng, 1.0);
  init_normal(b->value, rng, 1.0);
  const std::string path = "/tmp/spancoref_test_store.bin";
  store.save(path, "{\"note\":42}");

  ParamStore loaded;
  loaded.create("enc.a", 4, 5);
  loaded.create("head.b", 2, 3);
  const std::string config = loaded.load_into(path);
  CHECK(config.find("42") != std::string::npos);
  for (size_t i = 0; i < a->value.size(); ++i)
    CHECK(loaded.params()[0]->value.data[i] == a->value.data[i]);
  for (size_t i = 0; i < b->value.size(); ++i)
    CHECK(loaded.params()[1]->value.data[i] == b->value.data[i]);

  ParamStore wrong;
  wrong.create("enc.a", 4, 5);
  CHECK_THROWS(wrong.load_into(path));
}

TEST_CASE("adam applies group learning rates and skips frozen params") {
  ParamStore store;
  Parameter* enc = store.create("enc.w", 1, 1);
  Parameter* head = store.create("head.w", 1, 1);
  enc->value.data[0] = 1.0;
  head->value.data[0] = 1.0;
  AdamOptimizer opt(store, {{"enc.", 0.1}, {"head.", 0.2}});

  enc->grad.data[0] = 1.0;
  head->grad.data[0] = 1.0;
  opt.step();
  // First Adam step moves by ~lr regardless of gradient scale.
  CHECK(enc->value.data[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-3));
  CHECK(head->value.data[0] == doctest::Approx(1.0 - 0.2).epsilon(1e-3));

  const double enc_before = enc->value.data[0];
  enc->frozen = true;
  enc->grad.data[0] = 1.0;
  head->grad.data[0] = 1.0;
  opt.step();
  CHECK(enc->value.data[0] == enc_before);
  CHECK(head->value.data[0] < 1.0 - 0.2);
}

TEST_CASE("adam state round-trips with its step counter") {
  ParamStore store;
  Parameter* w = store.create("head.w", 2, 2);
  w->value.fill(1.0);
  AdamOptimizer opt(store, {{"", 0.05}});
  for (int i = 0; i < 3; ++i) {
    w->grad.fill(0.5);
    opt.step();
  }
  CHECK(opt.step_count() == 3);
  const std::string path = "/tmp/spancoref_test_adam.bin";
  opt.save_state(path);

  AdamOptimizer opt2(store, {{"", 0.05}});
  opt2.load_state(path);
  CHECK(opt2.step_count() == 3);
  w->grad.fill(0.5);
  opt2.step();
  CHECK(opt2.step_count() == 4);
}
