#include "spancoref/nn/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace coref::nn {

namespace {

enum class Op {
  input,
  param,
  add,
  add_bias,
  mul,
  scale,
  gelu,
  matmul,
  transpose,
  concat_cols,
  concat_rows,
  slice_cols,
  gather_rows,
  merge_rows,
  softmax_rows,
  layer_norm,
  dropout,
  sum,
  bce,
  marginal_nll,
};

struct Node {
  Op op;
  int a = -1, b = -1, c = -1;
  std::vector<int> arg_list;
  Matrix val;
  double k = 0.0;                           // scalar for scale
  std::vector<int> idx;                     // gather rows / slice [start,len]
  std::vector<std::pair<int, int>> picks;   // merge_rows sources
  std::vector<double> aux;                  // labels, saved stats, masks
  std::vector<int> gold;                    // marginal gold indices
  Parameter* p = nullptr;
};

constexpr double kLnEps = 1e-5;

double gelu_val(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }
double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

}  // namespace

struct Graph::Impl {
  std::vector<Node> nodes;
  std::vector<Matrix> grads;  // allocated lazily during backward
  std::mt19937_64 dropout_rng;

  int push(Node n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }
  const Node& node(Var v) const { return nodes.at(v.id); }

  Matrix& grad_for(int id) {
    Matrix& g = grads[id];
    if (g.rows == 0 && g.cols == 0) {
      const Matrix& v = nodes[id].val;
      g = Matrix::zeros(v.rows, v.cols);
    }
    return g;
  }
  bool has_grad(int id) const {
    return grads[id].rows != 0 || grads[id].cols != 0;
  }
};

Graph::Graph(bool training, uint64_t dropout_seed)
    : impl_(std::make_unique<Impl>()), training_(training) {
  impl_->dropout_rng.seed(dropout_seed);
  impl_->nodes.reserve(1024);
}
Graph::~Graph() = default;

const Matrix& Graph::value(Var v) const { return impl_->node(v).val; }

double Graph::scalar(Var v) const {
  const Matrix& m = impl_->node(v).val;
  if (m.rows != 1 || m.cols != 1)
    throw std::logic_error("Graph::scalar: node is not 1x1");
  return m.data[0];
}

size_t Graph::node_count() const { return impl_->nodes.size(); }

Var Graph::input(Matrix m) {
  Node n;
  n.op = Op::input;
  n.val = std::move(m);
  return {impl_->push(std::move(n))};
}

Var Graph::scalar_input(double v) {
  Matrix m(1, 1);
  m.data[0] = v;
  return input(std::move(m));
}

Var Graph::param(Parameter* p) {
  if (!p) throw std::logic_error("Graph::param: null parameter");
  Node n;
  n.op = Op::param;
  n.val = p->value;
  n.p = p;
  return {impl_->push(std::move(n))};
}

Var Graph::add(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (!va.same_shape(vb)) throw std::logic_error("add: shape mismatch");
  Node n;
  n.op = Op::add;
  n.a = a.id;
  n.b = b.id;
  n.val = va;
  for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] += vb.data[i];
  return {impl_->push(std::move(n))};
}

Var Graph::add_bias(Var a, Var bias) {
  const Matrix& va = value(a);
  const Matrix& vb = value(bias);
  if (vb.rows != 1 || vb.cols != va.cols)
    throw std::logic_error("add_bias: bias must be 1 x cols");
  Node n;
  n.op = Op::add_bias;
  n.a = a.id;
  n.b = bias.id;
  n.val = va;
  for (int r = 0; r < va.rows; ++r) {
    double* row = n.val.row_ptr(r);
    for (int c = 0; c < va.cols; ++c) row[c] += vb.data[c];
  }
  return {impl_->push(std::move(n))};
}

Var Graph::mul(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (!va.same_shape(vb)) throw std::logic_error("mul: shape mismatch");
  Node n;
  n.op = Op::mul;
  n.a = a.id;
  n.b = b.id;
  n.val = va;
  for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] *= vb.data[i];
  return {impl_->push(std::move(n))};
}

Var Graph::scale(Var a, double c) {
  Node n;
  n.op = Op::scale;
  n.a = a.id;
  n.k = c;
  n.val = value(a);
  for (double& x : n.val.data) x *= c;
  return {impl_->push(std::move(n))};
}

Var Graph::div_scalar(Var a, double c) {
  if (c == 0.0) throw std::logic_error("div_scalar: divide by zero");
  Node n;
  n.op = Op::scale;  // same backward with k interpreted as divisor flag
  n.a = a.id;
  n.k = 0.0;
  n.aux = {c};  // marks division
  n.val = value(a);
  for (double& x : n.val.data) x /= c;
  return {impl_->push(std::move(n))};
}

Var Graph::gelu(Var a) {
  Node n;
  n.op = Op::gelu;
  n.a = a.id;
  n.val = value(a);
  for (double& x : n.val.data) x = gelu_val(x);
  return {impl_->push(std::move(n))};
}

Var Graph::matmul(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.cols != vb.rows) throw std::logic_error("matmul: shape mismatch");
  Node n;
  n.op = Op::matmul;
  n.a = a.id;
  n.b = b.id;
  n.val = Matrix::zeros(va.rows, vb.cols);
  matmul_acc(va, vb, n.val);
  return {impl_->push(std::move(n))};
}

Var Graph::transpose(Var a) {
  const Matrix& va = value(a);
  Node n;
  n.op = Op::transpose;
  n.a = a.id;
  n.val = Matrix::zeros(va.cols, va.rows);
  for (int r = 0; r < va.rows; ++r)
    for (int c = 0; c < va.cols; ++c) n.val.at(c, r) = va.at(r, c);
  return {impl_->push(std::move(n))};
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat_cols: no parts");
  int rows = value(parts[0]).rows, cols = 0;
  for (Var p : parts) {
    if (value(p).rows != rows)
      throw std::logic_error("concat_cols: row mismatch");
    cols += value(p).cols;
  }
  Node n;
  n.op = Op::concat_cols;
  for (Var p : parts) n.arg_list.push_back(p.id);
  n.val = Matrix::zeros(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Matrix& vp = value(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < vp.cols; ++c) n.val.at(r, off + c) = vp.at(r, c);
    off += vp.cols;
  }
  return {impl_->push(std::move(n))};
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat_rows: no parts");
  int cols = value(parts[0]).cols, rows = 0;
  for (Var p : parts) {
    if (value(p).cols != cols)
      throw std::logic_error("concat_rows: column mismatch");
    rows += value(p).rows;
  }
  Node n;
  n.op = Op::concat_rows;
  for (Var p : parts) n.arg_list.push_back(p.id);
  n.val = Matrix::zeros(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Matrix& vp = value(p);
    for (int r = 0; r < vp.rows; ++r)
      for (int c = 0; c < cols; ++c) n.val.at(off + r, c) = vp.at(r, c);
    off += vp.rows;
  }
  return {impl_->push(std::move(n))};
}

Var Graph::slice_cols(Var a, int start, int len) {
  const Matrix& va = value(a);
  if (start < 0 || len <= 0 || start + len > va.cols)
    throw std::logic_error("slice_cols: range out of bounds");
  Node n;
  n.op = Op::slice_cols;
  n.a = a.id;
  n.idx = {start, len};
  n.val = Matrix::zeros(va.rows, len);
  for (int r = 0; r < va.rows; ++r)
    for (int c = 0; c < len; ++c) n.val.at(r, c) = va.at(r, start + c);
  return {impl_->push(std::move(n))};
}

Var Graph::gather_rows(Var a, std::vector<int> row_indices) {
  const Matrix& va = value(a);
  Node n;
  n.op = Op::gather_rows;
  n.a = a.id;
  n.val = Matrix::zeros(static_cast<int>(row_indices.size()), va.cols);
  for (size_t r = 0; r < row_indices.size(); ++r) {
    const int src = row_indices[r];
    if (src < 0 || src >= va.rows)
      throw std::logic_error("gather_rows: index out of bounds");
    for (int c = 0; c < va.cols; ++c)
      n.val.at(static_cast<int>(r), c) = va.at(src, c);
  }
  n.idx = std::move(row_indices);
  return {impl_->push(std::move(n))};
}

Var Graph::merge_rows(const std::vector<Var>& sources,
                      std::vector<std::pair<int, int>> picks) {
  if (sources.empty()) throw std::logic_error("merge_rows: no sources");
  const int cols = value(sources[0]).cols;
  for (Var s : sources)
    if (value(s).cols != cols)
      throw std::logic_error("merge_rows: column mismatch");
  Node n;
  n.op = Op::merge_rows;
  for (Var s : sources) n.arg_list.push_back(s.id);
  n.val = Matrix::zeros(static_cast<int>(picks.size()), cols);
  for (size_t r = 0; r < picks.size(); ++r) {
    const auto [which, row] = picks[r];
    if (which < 0 || which >= static_cast<int>(sources.size()))
      throw std::logic_error("merge_rows: source index out of bounds");
    const Matrix& src = value(sources[which]);
    if (row < 0 || row >= src.rows)
      throw std::logic_error("merge_rows: row index out of bounds");
    for (int c = 0; c < cols; ++c)
      n.val.at(static_cast<int>(r), c) = src.at(row, c);
  }
  n.picks = std::move(picks);
  return {impl_->push(std::move(n))};
}

Var Graph::softmax_rows(Var a) {
  const Matrix& va = value(a);
  Node n;
  n.op = Op::softmax_rows;
  n.a = a.id;
  n.val = va;
  for (int r = 0; r < va.rows; ++r) {
    double* row = n.val.row_ptr(r);
    double mx = row[0];
    for (int c = 1; c < va.cols; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    for (int c = 0; c < va.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      z += row[c];
    }
    for (int c = 0; c < va.cols; ++c) row[c] /= z;
  }
  return {impl_->push(std::move(n))};
}

Var Graph::layer_norm(Var a, Var gain, Var bias) {
  const Matrix& va = value(a);
  const Matrix& vg = value(gain);
  const Matrix& vb = value(bias);
  if (vg.rows != 1 || vg.cols != va.cols || vb.rows != 1 ||
      vb.cols != va.cols)
    throw std::logic_error("layer_norm: gain/bias must be 1 x cols");
  Node n;
  n.op = Op::layer_norm;
  n.a = a.id;
  n.b = gain.id;
  n.c = bias.id;
  n.val = Matrix::zeros(va.rows, va.cols);
  n.aux.resize(static_cast<size_t>(va.rows) * 2);  // mean, inv_std per row
  for (int r = 0; r < va.rows; ++r) {
    const double* x = va.row_ptr(r);
    double mean = 0.0;
    for (int c = 0; c < va.cols; ++c) mean += x[c];
    mean /= va.cols;
    double var = 0.0;
    for (int c = 0; c < va.cols; ++c) var += (x[c] - mean) * (x[c] - mean);
    var /= va.cols;
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    n.aux[2 * r] = mean;
    n.aux[2 * r + 1] = inv;
    double* y = n.val.row_ptr(r);
    for (int c = 0; c < va.cols; ++c)
      y[c] = (x[c] - mean) * inv * vg.data[c] + vb.data[c];
  }
  return {impl_->push(std::move(n))};
}

Var Graph::dropout(Var a, double p) {
  if (!training_ || p <= 0.0) return a;
  if (p >= 1.0) throw std::logic_error("dropout: p must be < 1");
  const Matrix& va = value(a);
  Node n;
  n.op = Op::dropout;
  n.a = a.id;
  n.val = va;
  n.aux.resize(va.size());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  for (size_t i = 0; i < va.size(); ++i) {
    const double keep = uni(impl_->dropout_rng) >= p ? keep_scale : 0.0;
    n.aux[i] = keep;
    n.val.data[i] *= keep;
  }
  return {impl_->push(std::move(n))};
}

Var Graph::sum(Var a) {
  const Matrix& va = value(a);
  Node n;
  n.op = Op::sum;
  n.a = a.id;
  n.val = Matrix(1, 1);
  double s = 0.0;
  for (double x : va.data) s += x;
  n.val.data[0] = s;
  return {impl_->push(std::move(n))};
}

Var Graph::bce_with_logits(Var logits, std::vector<double> labels) {
  const Matrix& vl = value(logits);
  if (vl.cols != 1 || static_cast<size_t>(vl.rows) != labels.size())
    throw std::logic_error("bce_with_logits: logits must be k x 1 = labels");
  Node n;
  n.op = Op::bce;
  n.a = logits.id;
  n.val = Matrix(1, 1);
  double loss = 0.0;
  for (int i = 0; i < vl.rows; ++i) {
    const double s = vl.data[i];
    const double y = labels[i];
    // max(s,0) - s*y + log(1 + exp(-|s|)), the numerically stable form
    loss += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::fabs(s)));
  }
  n.val.data[0] = loss;
  n.aux = std::move(labels);
  return {impl_->push(std::move(n))};
}

Var Graph::marginal_nll(Var scores, std::vector<int> gold) {
  const Matrix& vs = value(scores);
  if (vs.cols != 1)
    throw std::logic_error("marginal_nll: scores must be k x 1");
  if (gold.empty())
    throw std::logic_error("marginal_nll: gold set must be non-empty");
  for (int g : gold)
    if (g < 0 || g >= vs.rows)
      throw std::logic_error("marginal_nll: gold index out of bounds");
  Node n;
  n.op = Op::marginal_nll;
  n.a = scores.id;
  n.val = Matrix(1, 1);
  double mx = vs.data[0];
  for (int i = 1; i < vs.rows; ++i) mx = std::max(mx, vs.data[i]);
  double z_all = 0.0;
  for (int i = 0; i < vs.rows; ++i) z_all += std::exp(vs.data[i] - mx);
  double z_gold = 0.0;
  for (int g : gold) z_gold += std::exp(vs.data[g] - mx);
  n.val.data[0] = -(std::log(z_gold) - std::log(z_all));
  n.gold = std::move(gold);
  return {impl_->push(std::move(n))};
}

void Graph::backward(Var root) {
  auto& nodes = impl_->nodes;
  auto& grads = impl_->grads;
  grads.clear();
  grads.resize(nodes.size());
  {
    const Matrix& rv = nodes.at(root.id).val;
    if (rv.rows != 1 || rv.cols != 1)
      throw std::logic_error("backward: root must be 1x1");
    impl_->grad_for(root.id).data[0] = 1.0;
  }

  for (int id = static_cast<int>(nodes.size()) - 1; id >= 0; --id) {
    if (!impl_->has_grad(id)) continue;
    Node& n = nodes[id];
    const Matrix& g = grads[id];
    switch (n.op) {
      case Op::input:
        break;
      case Op::param:
        for (size_t i = 0; i < g.size(); ++i) n.p->grad.data[i] += g.data[i];
        break;
      case Op::add: {
        Matrix& ga = impl_->grad_for(n.a);
        Matrix& gb = impl_->grad_for(n.b);
        for (size_t i = 0; i < g.size(); ++i) {
          ga.data[i] += g.data[i];
          gb.data[i] += g.data[i];
        }
        break;
      }
      case Op::add_bias: {
        Matrix& ga = impl_->grad_for(n.a);
        Matrix& gb = impl_->grad_for(n.b);
        for (size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) gb.data[c] += g.at(r, c);
        break;
      }
      case Op::mul: {
        const Matrix& va = nodes[n.a].val;
        const Matrix& vb = nodes[n.b].val;
        Matrix& ga = impl_->grad_for(n.a);
        Matrix& gb = impl_->grad_for(n.b);
        for (size_t i = 0; i < g.size(); ++i) {
          ga.data[i] += g.data[i] * vb.data[i];
          gb.data[i] += g.data[i] * va.data[i];
        }
        break;
      }
      case Op::scale: {
        Matrix& ga = impl_->grad_for(n.a);
        if (!n.aux.empty()) {  // division by n.aux[0]
          const double c = n.aux[0];
          for (size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / c;
        } else {
          for (size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * n.k;
        }
        break;
      }
      case Op::gelu: {
        const Matrix& va = nodes[n.a].val;
        Matrix& ga = impl_->grad_for(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          ga.data[i] += g.data[i] * gelu_grad(va.data[i]);
        break;
      }
      case Op::matmul: {
        const Matrix& va = nodes[n.a].val;
        const Matrix& vb = nodes[n.b].val;
        matmul_a_bt_acc(g, vb, impl_->grad_for(n.a));   // dA += G B^T
        matmul_at_b_acc(va, g, impl_->grad_for(n.b));   // dB += A^T G
        break;
      }
      case Op::transpose: {
        Matrix& ga = impl_->grad_for(n.a);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) ga.at(c, r) += g.at(r, c);
        break;
      }
      case Op::concat_cols: {
        int off = 0;
        for (int src : n.arg_list) {
          Matrix& gs = impl_->grad_for(src);
          for (int r = 0; r < gs.rows; ++r)
            for (int c = 0; c < gs.cols; ++c) gs.at(r, c) += g.at(r, off + c);
          off += gs.cols;
        }
        break;
      }
      case Op::concat_rows: {
        int off = 0;
        for (int src : n.arg_list) {
          Matrix& gs = impl_->grad_for(src);
          for (int r = 0; r < gs.rows; ++r)
            for (int c = 0; c < gs.cols; ++c) gs.at(r, c) += g.at(off + r, c);
          off += gs.rows;
        }
        break;
      }
      case Op::slice_cols: {
        Matrix& ga = impl_->grad_for(n.a);
        const int start = n.idx[0], len = n.idx[1];
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < len; ++c) ga.at(r, start + c) += g.at(r, c);
        break;
      }
      case Op::gather_rows: {
        Matrix& ga = impl_->grad_for(n.a);
        for (size_t r = 0; r < n.idx.size(); ++r)
          for (int c = 0; c < g.cols; ++c)
            ga.at(n.idx[r], c) += g.at(static_cast<int>(r), c);
        break;
      }
      case Op::merge_rows: {
        for (size_t r = 0; r < n.picks.size(); ++r) {
          const auto [which, row] = n.picks[r];
          Matrix& gs = impl_->grad_for(n.arg_list[which]);
          for (int c = 0; c < g.cols; ++c)
            gs.at(row, c) += g.at(static_cast<int>(r), c);
        }
        break;
      }
      case Op::softmax_rows: {
        const Matrix& y = n.val;
        Matrix& ga = impl_->grad_for(n.a);
        for (int r = 0; r < g.rows; ++r) {
          double dot = 0.0;
          for (int c = 0; c < g.cols; ++c) dot += g.at(r, c) * y.at(r, c);
          for (int c = 0; c < g.cols; ++c)
            ga.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
        }
        break;
      }
      case Op::layer_norm: {
        const Matrix& x = nodes[n.a].val;
        const Matrix& gain = nodes[n.b].val;
        Matrix& gx = impl_->grad_for(n.a);
        Matrix& ggain = impl_->grad_for(n.b);
        Matrix& gbias = impl_->grad_for(n.c);
        const int cols = x.cols;
        for (int r = 0; r < x.rows; ++r) {
          const double mean = n.aux[2 * r];
          const double inv = n.aux[2 * r + 1];
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int c = 0; c < cols; ++c) {
            const double xhat = (x.at(r, c) - mean) * inv;
            const double dxhat = g.at(r, c) * gain.data[c];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat;
            ggain.data[c] += g.at(r, c) * xhat;
            gbias.data[c] += g.at(r, c);
          }
          mean_dxhat /= cols;
          mean_dxhat_xhat /= cols;
          for (int c = 0; c < cols; ++c) {
            const double xhat = (x.at(r, c) - mean) * inv;
            const double dxhat = g.at(r, c) * gain.data[c];
            gx.at(r, c) +=
                inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
          }
        }
        break;
      }
      case Op::dropout: {
        Matrix& ga = impl_->grad_for(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          ga.data[i] += g.data[i] * n.aux[i];
        break;
      }
      case Op::sum: {
        Matrix& ga = impl_->grad_for(n.a);
        const double gv = g.data[0];
        for (double& x : ga.data) x += gv;
        break;
      }
      case Op::bce: {
        const Matrix& s = nodes[n.a].val;
        Matrix& ga = impl_->grad_for(n.a);
        const double gv = g.data[0];
        for (int i = 0; i < s.rows; ++i) {
          const double sig = 1.0 / (1.0 + std::exp(-s.data[i]));
          ga.data[i] += gv * (sig - n.aux[i]);
        }
        break;
      }
      case Op::marginal_nll: {
        const Matrix& s = nodes[n.a].val;
        Matrix& ga = impl_->grad_for(n.a);
        const double gv = g.data[0];
        double mx = s.data[0];
        for (int i = 1; i < s.rows; ++i) mx = std::max(mx, s.data[i]);
        double z_all = 0.0;
        for (int i = 0; i < s.rows; ++i) z_all += std::exp(s.data[i] - mx);
        double z_gold = 0.0;
        for (int gi : n.gold) z_gold += std::exp(s.data[gi] - mx);
        for (int i = 0; i < s.rows; ++i)
          ga.data[i] += gv * std::exp(s.data[i] - mx) / z_all;
        for (int gi : n.gold)
          ga.data[gi] -= gv * std::exp(s.data[gi] - mx) / z_gold;
        break;
      }
    }
  }
}

void init_normal(Matrix& m, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& x : m.data) x = dist(rng);
}

}  // namespace coref::nn
