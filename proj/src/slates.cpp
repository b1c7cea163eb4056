#include "spancoref/slates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace coref {

void CandidateSlate::validate() const {
  if (overall_scores.size() != candidates.size() + 1)
    throw ContractViolation(
        "slate: overall_scores must have one entry per candidate plus the dummy");
  for (double s : overall_scores)
    if (!std::isfinite(s))
      throw ContractViolation("slate: scores must be finite");
}

std::vector<double> slate_distribution(const CandidateSlate& slate) {
  slate.validate();
  const auto& s = slate.overall_scores;
  const double mx = *std::max_element(s.begin(), s.end());
  std::vector<double> p(s.size());
  double z = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    p[i] = std::exp(s[i] - mx);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

double marginal_loss_value(const CandidateSlate& slate,
                           const std::vector<int>& gold_rows) {
  slate.validate();
  if (gold_rows.empty())
    throw ContractViolation(
        "marginal_loss: empty gold set (map it to the dummy row first)");
  const auto& s = slate.overall_scores;
  for (int r : gold_rows)
    if (r < 0 || r >= static_cast<int>(s.size()))
      throw ContractViolation("marginal_loss: gold row out of range");
  const double mx = *std::max_element(s.begin(), s.end());
  double z_all = 0.0;
  for (double x : s) z_all += std::exp(x - mx);
  double z_gold = 0.0;
  for (int r : gold_rows) z_gold += std::exp(s[r] - mx);
  return -(std::log(z_gold) - std::log(z_all));
}

int best_row(const CandidateSlate& slate) {
  slate.validate();
  // Start from the dummy so it wins exact ties; earlier candidates win
  // among equal non-dummy scores because only a strict improvement moves
  // the choice.
  int best = slate.dummy_row();
  double best_score = slate.overall_scores[best];
  for (size_t i = 0; i < slate.candidates.size(); ++i) {
    if (slate.overall_scores[i] > best_score) {
      best = static_cast<int>(i);
      best_score = slate.overall_scores[i];
    }
  }
  return best;
}

namespace {

struct UnionFind {
  std::map<Span, Span> parent;
  Span find(Span x) {
    auto it = parent.find(x);
    if (it == parent.end()) {
      parent[x] = x;
      return x;
    }
    if (it->second == x) return x;
    const Span root = find(it->second);
    parent[x] = root;
    return root;
  }
  void unite(Span a, Span b) { parent[find(a)] = find(b); }
};

}  // namespace

ClusterSet decode_clusters(const std::vector<CandidateSlate>& slates) {
  UnionFind uf;
  for (const CandidateSlate& slate : slates) {
    const int row = best_row(slate);
    if (row == slate.dummy_row()) continue;  // abandoned node
    uf.unite(slate.query_span, slate.candidates[row]);
  }
  std::map<Span, std::vector<Span>> components;
  for (const auto& [span, _] : uf.parent) components[uf.find(span)].push_back(span);

  ClusterSet out;
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    out.clusters.push_back(std::move(members));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace coref
