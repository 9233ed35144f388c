#pragma once

#include <span>
#include <string>

#include "gossiprec/eval.hpp"
#include "gossiprec/param_vector.hpp"

namespace gossiprec {

enum class AggregatorKind { fedavg, age, performance, reptile_decentralized };

AggregatorKind parse_aggregator(std::string_view name);
std::string_view to_string(AggregatorKind k) noexcept;

struct MergeResult {
  ParamVector params;
  /// Both weights were zero and the unweighted mean was used instead.
  bool degenerate = false;
};

/// (w1 * m1 + w2 * m2) / (w1 + w2), element-wise. Throws ProtocolError on a
/// layout mismatch or negative weight.
MergeResult weighted_merge(const ParamVector& m1, const ParamVector& m2, double w1, double w2);

/// Pairwise FedAvg: weights are the owners' training-set sizes.
MergeResult decentralized_fedavg(const ParamVector& m1, const ParamVector& m2,
                                 std::uint64_t n1, std::uint64_t n2);

/// Older models (more local updates) weigh more.
MergeResult model_age_based(const ParamVector& m1, const ParamVector& m2, ModelAge age1,
                            ModelAge age2);

/// init + eps * (locally_trained - init).
ParamVector reptile_step(const ParamVector& init, const ParamVector& locally_trained, double eps);

struct Personalized {
  ParamVector shared;
  std::vector<double> user;
};

/// Fine-tunes copies of `global` and `user` for `epochs` local epochs, then
/// applies reptile_step(global, fine-tuned, eps). The user row returned is
/// the fine-tuned one.
Personalized personalize(const ModelSpec& spec, const GossipModel& global,
                         std::span<const double> user, const NodeData& data, double eps,
                         std::size_t epochs, Rng& rng);

/// Ranking quality of `shared` (paired with the local user row) on the
/// weighting set: HR@k for GMF, F1@k for PRME-G. Pure; throws on empty set.
double evaluate_on_weighting_set(const ModelSpec& spec, const ParamVector& shared,
                                 std::span<const double> user, const EvalSet& weighting, int k);

struct AggregationOutcome {
  GossipModel merged;
  double received_perf = 0.0;  ///< P_x
  double local_perf = 0.0;     ///< P_i
  bool degenerate = false;     ///< P_i = P_x = 0, plain average used
};

/// Scores both models on the local weighting set and averages them with
/// those scores as weights. The merged model keeps the local owner and
/// sample count and takes the larger of the two ages.
AggregationOutcome performance_based_aggregate(const ModelSpec& spec, const GossipModel& local,
                                               const GossipModel& received,
                                               std::span<const double> user,
                                               const EvalSet& weighting, int k);

}  // namespace gossiprec
