#include "spancoref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace coref {

PRF make_prf(double p_num, double p_den, double r_num, double r_den) {
  PRF out;
  out.precision = p_den > 0 ? p_num / p_den : 0.0;
  out.recall = r_den > 0 ? r_num / r_den : 0.0;
  out.f1 = (out.precision + out.recall) > 0
               ? 2.0 * out.precision * out.recall /
                     (out.precision + out.recall)
               : 0.0;
  return out;
}

namespace {

Clusters dedupe(const Clusters& cs) {
  Clusters out;
  for (const auto& c : cs) {
    std::vector<Span> u(c.begin(), c.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    if (!u.empty()) out.push_back(std::move(u));
  }
  return out;
}

std::map<Span, int> cluster_of(const Clusters& cs) {
  std::map<Span, int> out;
  for (size_t i = 0; i < cs.size(); ++i)
    for (const Span& s : cs[i]) out[s] = static_cast<int>(i);
  return out;
}

// MUC recall numerator/denominator of `key` against `response`:
// sum over key clusters S of (|S| - |partition of S by response|) and
// (|S| - 1). Mentions absent from the response partition as singletons.
void muc_counts(const Clusters& key, const Clusters& response, double* num,
                double* den) {
  const auto resp_of = cluster_of(response);
  for (const auto& S : key) {
    std::set<int> parts;
    int missing = 0;
    for (const Span& m : S) {
      auto it = resp_of.find(m);
      if (it == resp_of.end())
        ++missing;  // each its own part
      else
        parts.insert(it->second);
    }
    *num += static_cast<double>(S.size()) -
            static_cast<double>(parts.size() + missing);
    *den += static_cast<double>(S.size()) - 1.0;
  }
}

// B^3 recall numerator of `key` against `response`: per key mention, the
// overlap of its key cluster with its response cluster over the key
// cluster size. The denominator is the key mention count.
void b3_counts(const Clusters& key, const Clusters& response, double* num,
               double* den) {
  const auto resp_of = cluster_of(response);
  for (const auto& S : key) {
    for (const Span& m : S) {
      *den += 1.0;
      auto it = resp_of.find(m);
      if (it == resp_of.end()) continue;
      const auto& T = response[it->second];
      int overlap = 0;
      std::set<Span> t_set(T.begin(), T.end());
      for (const Span& x : S)
        if (t_set.count(x)) ++overlap;
      *num += static_cast<double>(overlap) / static_cast<double>(S.size());
    }
  }
}

double phi4(const std::vector<Span>& S, const std::vector<Span>& T) {
  std::set<Span> t_set(T.begin(), T.end());
  int inter = 0;
  for (const Span& x : S)
    if (t_set.count(x)) ++inter;
  return 2.0 * inter / static_cast<double>(S.size() + T.size());
}

double ceaf_best_total(const Clusters& gold, const Clusters& pred) {
  if (gold.empty() || pred.empty()) return 0.0;
  std::vector<std::vector<double>> w(gold.size(),
                                     std::vector<double>(pred.size(), 0.0));
  for (size_t i = 0; i < gold.size(); ++i)
    for (size_t j = 0; j < pred.size(); ++j) w[i][j] = phi4(gold[i], pred[j]);
  return max_weight_assignment(w).total;
}

}  // namespace

PRF muc(const Clusters& gold_in, const Clusters& pred_in) {
  const Clusters gold = dedupe(gold_in), pred = dedupe(pred_in);
  double rn = 0, rd = 0, pn = 0, pd = 0;
  muc_counts(gold, pred, &rn, &rd);
  muc_counts(pred, gold, &pn, &pd);
  return make_prf(pn, pd, rn, rd);
}

PRF b_cubed(const Clusters& gold_in, const Clusters& pred_in) {
  const Clusters gold = dedupe(gold_in), pred = dedupe(pred_in);
  double rn = 0, rd = 0, pn = 0, pd = 0;
  b3_counts(gold, pred, &rn, &rd);
  b3_counts(pred, gold, &pn, &pd);
  return make_prf(pn, pd, rn, rd);
}

PRF ceaf_phi4(const Clusters& gold_in, const Clusters& pred_in) {
  const Clusters gold = dedupe(gold_in), pred = dedupe(pred_in);
  const double total = ceaf_best_total(gold, pred);
  return make_prf(total, static_cast<double>(pred.size()), total,
                  static_cast<double>(gold.size()));
}

void CorefEvaluator::add_document(const Clusters& gold_in,
                                  const Clusters& pred_in) {
  const Clusters gold = dedupe(gold_in), pred = dedupe(pred_in);
  muc_counts(gold, pred, &muc_rn_, &muc_rd_);
  muc_counts(pred, gold, &muc_pn_, &muc_pd_);
  b3_counts(gold, pred, &b3_rn_, &b3_rd_);
  b3_counts(pred, gold, &b3_pn_, &b3_pd_);
  ceaf_phi_ += ceaf_best_total(gold, pred);
  ceaf_gold_ += static_cast<double>(gold.size());
  ceaf_pred_ += static_cast<double>(pred.size());
}

MetricReport CorefEvaluator::report() const {
  MetricReport r;
  r.muc = make_prf(muc_pn_, muc_pd_, muc_rn_, muc_rd_);
  r.b_cubed = make_prf(b3_pn_, b3_pd_, b3_rn_, b3_rd_);
  r.ceaf_phi4 = make_prf(ceaf_phi_, ceaf_pred_, ceaf_phi_, ceaf_gold_);
  r.conll_avg_f1 = (r.muc.f1 + r.b_cubed.f1 + r.ceaf_phi4.f1) / 3.0;
  return r;
}

std::string MetricReport::to_table() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  auto row = [&os](const char* name, const PRF& m) {
    os << name << "  P " << m.precision << "  R " << m.recall << "  F1 "
       << m.f1 << "\n";
  };
  row("MUC      ", muc);
  row("B-cubed  ", b_cubed);
  row("CEAF-phi4", ceaf_phi4);
  os << "CoNLL avg F1 " << conll_avg_f1 << "\n";
  return os.str();
}

std::string MetricReport::to_jsonl() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  auto row = [&os](const char* name, const PRF& m) {
    os << "{\"metric\":\"" << name << "\",\"precision\":" << m.precision
       << ",\"recall\":" << m.recall << ",\"f1\":" << m.f1 << "}\n";
  };
  row("muc", muc);
  row("b_cubed", b_cubed);
  row("ceaf_phi4", ceaf_phi4);
  os << "{\"metric\":\"conll_avg\",\"f1\":" << conll_avg_f1 << "}\n";
  return os.str();
}

// Kuhn-Munkres with potentials on a square cost matrix (minimization).
// Returns the column matched to each row.
static std::vector<int> hungarian_min(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] >= 1) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

Assignment max_weight_assignment(
    const std::vector<std::vector<double>>& weight) {
  Assignment out;
  const int rows = static_cast<int>(weight.size());
  const int cols = rows > 0 ? static_cast<int>(weight[0].size()) : 0;
  out.col_of_row.assign(rows, -1);
  if (rows == 0 || cols == 0) return out;

  const int n = std::max(rows, cols);
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) cost[i][j] = -weight[i][j];

  const auto match = hungarian_min(cost);
  for (int i = 0; i < rows; ++i) {
    const int j = match[i];
    if (j >= 0 && j < cols) {
      out.col_of_row[i] = j;
      out.total += weight[i][j];
    }
  }
  return out;
}

namespace {
double f1_from_counts(long tp, long fp, long fn) {
  const double den = 2.0 * tp + fp + fn;
  return den > 0 ? 2.0 * tp / den : 0.0;
}
}  // namespace

GapReport gap_score(const std::vector<GapExample>& examples,
                    const std::map<std::string, GapPrediction>& predictions,
                    std::vector<std::string>* warnings) {
  long tp_m = 0, fp_m = 0, fn_m = 0;
  long tp_f = 0, fp_f = 0, fn_f = 0;
  long tp_all = 0, fp_all = 0, fn_all = 0;
  for (const GapExample& ex : examples) {
    GapPrediction pred;
    auto it = predictions.find(ex.example_id);
    if (it != predictions.end()) {
      pred = it->second;
    } else if (warnings) {
      warnings->push_back("no prediction for GAP example " + ex.example_id +
                          "; scoring as both-false");
    }
    const bool masc = ex.pronoun_gender == PronounGender::masculine;
    auto tally = [&](bool gold, bool guess) {
      if (guess && gold) {
        ++tp_all;
        (masc ? tp_m : tp_f)++;
      } else if (guess && !gold) {
        ++fp_all;
        (masc ? fp_m : fp_f)++;
      } else if (!guess && gold) {
        ++fn_all;
        (masc ? fn_m : fn_f)++;
      }
    };
    tally(ex.a_is_coreferent, pred.a_coreferent);
    tally(ex.b_is_coreferent, pred.b_coreferent);
  }
  GapReport r;
  r.masculine_f1 = f1_from_counts(tp_m, fp_m, fn_m);
  r.feminine_f1 = f1_from_counts(tp_f, fp_f, fn_f);
  r.overall_f1 = f1_from_counts(tp_all, fp_all, fn_all);
  r.bias = r.masculine_f1 > 0 ? r.feminine_f1 / r.masculine_f1 : 0.0;
  return r;
}

std::string GapReport::to_table() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "GAP  M " << masculine_f1 << "  F " << feminine_f1 << "  Bias "
     << bias << "  Overall " << overall_f1 << "\n";
  return os.str();
}

double mention_recall(const std::vector<Span>& gold_mentions,
                      const std::vector<Span>& proposed) {
  std::set<Span> gold(gold_mentions.begin(), gold_mentions.end());
  if (gold.empty()) return 1.0;
  const std::set<Span> prop(proposed.begin(), proposed.end());
  int hit = 0;
  for (const Span& s : gold)
    if (prop.count(s)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

}  // namespace coref
