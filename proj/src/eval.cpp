#include "gossiprec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gossiprec/ranking.hpp"

namespace gossiprec {

int hr_at(std::span<const ItemId> ranked, ItemId target) {
  return std::find(ranked.begin(), ranked.end(), target) != ranked.end() ? 1 : 0;
}

double ndcg_at(std::optional<std::size_t> position) {
  if (!position) return 0.0;
  return std::log(2.0) / std::log(static_cast<double>(*position) + 2.0);
}

std::optional<PrecisionRecall> precision_recall_f1_at(std::span<const ItemId> ranked,
                                                      std::size_t r,
                                                      std::span<const ItemId> relevant) {
  if (relevant.empty()) return std::nullopt;
  if (r == 0) throw std::invalid_argument("precision_recall_f1_at: r must be positive");
  std::vector<ItemId> rel(relevant.begin(), relevant.end());
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
  std::size_t hits = 0;
  const std::size_t depth = std::min(r, ranked.size());
  for (std::size_t i = 0; i < depth; ++i)
    if (std::binary_search(rel.begin(), rel.end(), ranked[i])) ++hits;
  PrecisionRecall out;
  out.precision = static_cast<double>(hits) / static_cast<double>(r);
  out.recall = static_cast<double>(hits) / static_cast<double>(rel.size());
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

NodeMetrics evaluate_lists(ModelFamily family, const EvalSet& set, std::span<const int> ks,
                           const Scorer& scorer) {
  NodeMetrics m;
  m.ks.assign(ks.begin(), ks.end());
  if (set.targets.size() != set.pools.size())
    throw std::invalid_argument("evaluate: every target needs a negative pool");
  if (set.empty()) {
    m.defined = false;
    return m;
  }
  if (family == ModelFamily::gmf) {
    m.hr.assign(ks.size(), 0.0);
    m.ndcg.assign(ks.size(), 0.0);
    std::vector<ItemId> cands;
    std::vector<double> scores;
    for (std::size_t t = 0; t < set.targets.size(); ++t) {
      cands.assign(1, set.targets[t]);
      cands.insert(cands.end(), set.pools[t].begin(), set.pools[t].end());
      scores.assign(cands.size(), 0.0);
      scorer(cands, scores);
      const std::size_t pos = rank_position(0, cands, scores);
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const auto k = static_cast<std::size_t>(ks[j]);
        if (pos < k) {
          m.hr[j] += 1.0;
          m.ndcg[j] += ndcg_at(pos);
        }
      }
    }
    const auto n = static_cast<double>(set.targets.size());
    for (std::size_t j = 0; j < ks.size(); ++j) {
      m.hr[j] /= n;
      m.ndcg[j] /= n;
    }
    m.items = set.targets.size();
    return m;
  }

  std::vector<ItemId> relevant = set.targets;
  std::sort(relevant.begin(), relevant.end());
  relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());
  std::vector<ItemId> cands = relevant;
  for (const auto& pool : set.pools) cands.insert(cands.end(), pool.begin(), pool.end());
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  std::vector<double> scores(cands.size());
  scorer(cands, scores);
  const int kmax = *std::max_element(ks.begin(), ks.end());
  const auto depth = std::min(cands.size(), static_cast<std::size_t>(kmax));
  const auto ranked = top_k(cands, scores, depth);
  for (int k : ks) {
    const auto prf = precision_recall_f1_at(ranked, static_cast<std::size_t>(k), relevant);
    m.precision.push_back(prf->precision);
    m.recall.push_back(prf->recall);
    m.f1.push_back(prf->f1);
  }
  m.items = relevant.size();
  return m;
}

NodeMetrics evaluate_node(const ModelSpec& spec, const ParamVector& shared,
                          std::span<const double> user, const EvalSet& set,
                          std::span<const int> ks) {
  return evaluate_lists(spec.family, set, ks,
                        [&](std::span<const ItemId> c, std::span<double> out) {
                          score(spec, shared, user, set.context_prev, c, out);
                        });
}

double headline_metric(ModelFamily family, const NodeMetrics& m, int k) {
  const auto it = std::find(m.ks.begin(), m.ks.end(), k);
  if (it == m.ks.end()) throw std::invalid_argument("headline_metric: cutoff not evaluated");
  if (!m.defined) return 0.0;
  const auto j = static_cast<std::size_t>(it - m.ks.begin());
  return family == ModelFamily::gmf ? m.hr[j] : m.f1[j];
}

std::vector<std::string> metric_columns(ModelFamily family, std::span<const int> ks) {
  std::vector<std::string> names;
  const auto add = [&](const char* base) {
    for (int k : ks) names.push_back(std::string(base) + "@" + std::to_string(k));
  };
  if (family == ModelFamily::gmf) {
    add("hr");
    add("ndcg");
  } else {
    add("precision");
    add("recall");
    add("f1");
  }
  return names;
}

std::vector<double> metric_values(ModelFamily family, const NodeMetrics& m) {
  std::vector<double> out;
  const auto add = [&](const std::vector<double>& v) {
    if (m.defined)
      out.insert(out.end(), v.begin(), v.end());
    else
      out.insert(out.end(), m.ks.size(), 0.0);
  };
  if (family == ModelFamily::gmf) {
    add(m.hr);
    add(m.ndcg);
  } else {
    add(m.precision);
    add(m.recall);
    add(m.f1);
  }
  return out;
}

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank: empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Distribution cdf_and_percentiles(std::span<const double> values, std::span<const double> ps) {
  Distribution d;
  if (values.empty()) return d;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    d.cdf.emplace_back(v[i], static_cast<double>(i + 1) / n);
  }
  for (double p : ps) d.percentiles.emplace_back(p, nearest_rank(v, p));
  return d;
}

}  // namespace gossiprec
