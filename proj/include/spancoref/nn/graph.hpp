#ifndef SPANCOREF_NN_GRAPH_HPP
#define SPANCOREF_NN_GRAPH_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spancoref/nn/matrix.hpp"

namespace coref::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value, accumulated by Graph::backward
  bool frozen = false;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}
  void zero_grad() { grad.fill(0.0); }
};

// Handle into a Graph's tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff tape over Matrix values. Build the computation by
// calling ops, read values as you go, then call backward() once on a 1x1
// node; gradients accumulate into the bound Parameters' grad members.
// Evaluation-mode graphs (training = false) skip dropout, so repeated runs
// on identical input are bit-identical.
class Graph {
 public:
  explicit Graph(bool training = false, uint64_t dropout_seed = 0);
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool training() const { return training_; }

  // Leaves.
  Var input(Matrix m);
  Var scalar_input(double v);
  Var param(Parameter* p);

  // Elementwise / broadcast.
  Var add(Var a, Var b);            // same shape
  Var add_bias(Var a, Var bias);    // bias is 1 x cols, broadcast over rows
  Var mul(Var a, Var b);            // elementwise
  Var scale(Var a, double c);       // a * c
  Var div_scalar(Var a, double c);  // a / c
  Var gelu(Var a);

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var transpose(Var a);

  // Shape plumbing.
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_cols(Var a, int start, int len);
  Var gather_rows(Var a, std::vector<int> row_indices);
  // out row r = value(sources[picks[r].first]) row picks[r].second
  Var merge_rows(const std::vector<Var>& sources,
                 std::vector<std::pair<int, int>> picks);

  // Normalization and regularization.
  Var softmax_rows(Var a);
  Var layer_norm(Var a, Var gain, Var bias);  // per-row, eps 1e-5
  Var dropout(Var a, double p);

  // Reductions / losses; all return 1x1.
  Var sum(Var a);
  // Binary cross-entropy with logits, summed over entries; logits k x 1.
  Var bce_with_logits(Var logits, std::vector<double> labels);
  // -log sum_{j in gold} softmax(scores)_j; scores k x 1, gold non-empty.
  Var marginal_nll(Var scores, std::vector<int> gold);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;
  size_t node_count() const;

  // Backpropagates from a 1x1 root with seed gradient 1. May be called on
  // several roots; gradients keep accumulating.
  void backward(Var root);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool training_ = false;
};

// Gaussian init, in-place, via the supplied engine.
void init_normal(Matrix& m, std::mt19937_64& rng, double stddev);

}  // namespace coref::nn

#endif
