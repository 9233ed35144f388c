#pragma once

#include <cstdint>
#include <vector>

#include "gossiprec/aggregation.hpp"
#include "gossiprec/peersampling.hpp"
#include "gossiprec/run_report.hpp"

namespace gossiprec {

struct SimConfig {
  ModelSpec model;
  AggregatorKind aggregator = AggregatorKind::performance;
  SamplerKind sampler = SamplerKind::personalized;
  double alpha = 0.4;
  std::size_t view_size = 3;

  double push_period = 60.0;
  double push_jitter = 0.1;  ///< per-node period drawn from period * (1 +- jitter)
  double peer_sampling_period = 300.0;
  double checkpoint_period = 600.0;
  double max_sim_time = 24000.0;

  std::size_t convergence_window = 10;
  double convergence_delta = 0.001;
  bool stop_at_convergence = true;

  std::size_t epochs_per_receipt = 1;
  std::size_t initial_epochs = 1;
  int weighting_k = 10;
  std::vector<int> ks = {5, 10, 20};

  double base_delay = 0.05;      ///< mean of the exponential link delay, seconds
  double upload_min = 1.0e6;     ///< bytes per second
  double upload_max = 1.0e7;
  double meta_eps = 0.5;         ///< reptile-decentralized only
  std::size_t finetune_epochs = 5;

  std::uint64_t seed = 42;
  bool shared_init = true;  ///< every node starts from the same shared parameters
  unsigned threads = 0;  ///< 0: hardware concurrency; capped by GOSSIPREC_THREADS
  bool trace = false;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const SimConfig& cfg);

/// Gossip learning over one node per split. Nodes with an empty training
/// set are left out and counted in RunReport::excluded_nodes.
RunReport run_simulation(const SimConfig& cfg, const std::vector<NodeSplit>& splits);

}  // namespace gossiprec
