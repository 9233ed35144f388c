#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gossiprec/recommender.hpp"

namespace gossiprec {

/// 1 when `target` is among `ranked` (a top-r list), else 0.
int hr_at(std::span<const ItemId> ranked, ItemId target);

/// log 2 / log(p + 2) for a 0-based position p; 0 when absent.
double ndcg_at(std::optional<std::size_t> position);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall and F1 of a top-r list; nullopt when `relevant` is empty.
std::optional<PrecisionRecall> precision_recall_f1_at(std::span<const ItemId> ranked,
                                                      std::size_t r,
                                                      std::span<const ItemId> relevant);

/// Per-node metrics, one entry per cutoff in `ks`.
struct NodeMetrics {
  std::vector<int> ks;
  std::vector<double> hr, ndcg;                ///< GMF: averaged over target items
  std::vector<double> precision, recall, f1;  ///< PRME-G: one list per node
  std::size_t items = 0;
  bool defined = true;  ///< false when the node had nothing to evaluate
};

/// Fills scores for a candidate list; higher is better.
using Scorer = std::function<void(std::span<const ItemId>, std::span<double>)>;

/// Per-item ranking (each target against its pool) for GMF; for PRME-G a
/// single list over all distinct targets and the union of their pools.
NodeMetrics evaluate_lists(ModelFamily family, const EvalSet& set, std::span<const int> ks,
                           const Scorer& scorer);

NodeMetrics evaluate_node(const ModelSpec& spec, const ParamVector& shared,
                          std::span<const double> user, const EvalSet& set,
                          std::span<const int> ks);

/// The single number a family is judged by: HR@k for GMF, F1@k for PRME-G.
double headline_metric(ModelFamily family, const NodeMetrics& m, int k);

/// Column names for the metrics a family reports, e.g. "hr@10".
std::vector<std::string> metric_columns(ModelFamily family, std::span<const int> ks);
/// Values in metric_columns order.
std::vector<double> metric_values(ModelFamily family, const NodeMetrics& m);

struct Distribution {
  std::vector<std::pair<double, double>> cdf;          ///< (value, fraction <= value)
  std::vector<std::pair<double, double>> percentiles;  ///< (p, nearest-rank value)
};

inline const std::vector<double> kDefaultPercentiles = {1, 5, 10, 25, 50, 75, 90, 95, 99, 99.9};

/// Nearest-rank percentile of an ascending-sorted, non-empty sample.
double nearest_rank(std::span<const double> sorted, double p);

Distribution cdf_and_percentiles(std::span<const double> values,
                                 std::span<const double> ps = kDefaultPercentiles);

}  // namespace gossiprec
