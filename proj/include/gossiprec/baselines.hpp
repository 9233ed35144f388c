#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gossiprec/aggregation.hpp"
#include "gossiprec/run_report.hpp"

// Centralized federated comparators on the same node data.
namespace gossiprec {

struct FlConfig {
  ModelSpec model;
  double client_fraction = 0.1;
  std::size_t local_epochs = 1;
  std::size_t total_rounds = 400;
  double meta_eps = 0.5;
  std::size_t finetune_epochs = 5;
  std::vector<int> ks = {5, 10, 20};
  int weighting_k = 10;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

void validate(const FlConfig& cfg);

/// ceil(p * n), at least 1.
std::size_t clients_per_round(double client_fraction, std::size_t n);

/// Sum_i w_i m_i / Sum_i w_i, accumulated in the given order.
ParamVector fedavg_aggregate(std::span<const ParamVector> models,
                             std::span<const std::uint64_t> weights);

/// Called after every round with the sampled clients (ascending), the shared
/// parameters each returned, and the new global parameters.
using RoundHook = std::function<void(std::size_t round, std::span<const NodeId> clients,
                                     std::span<const ParamVector> returned,
                                     const ParamVector& global)>;

struct FlResult {
  GossipModel global;
  std::vector<std::vector<double>> users;  ///< per node, persisted across rounds
  std::vector<ParamVector> personalized;  ///< reptile_run only, per node
  RunReport report;
};

/// Random stream reptile_run uses to fine-tune `node`.
Rng finetune_rng(std::uint64_t seed, NodeId node);

/// FedAvg: each round samples clients, trains them from the global model and
/// averages their shared parameters weighted by training-set size. Every node
/// is evaluated on its own test set at the end.
FlResult fl_run(const FlConfig& cfg, const std::vector<NodeSplit>& splits,
                const RoundHook& hook = {});

/// fl_run, then per node: personalize(global, meta_eps, finetune_epochs).
FlResult reptile_run(const FlConfig& cfg, const std::vector<NodeSplit>& splits,
                     const RoundHook& hook = {});

}  // namespace gossiprec
