#include "gossiprec/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gossiprec/parallel.hpp"

namespace gossiprec {

namespace {

using Clock = std::chrono::steady_clock;

enum Stream : std::uint64_t { kInit = 1, kTrain, kNet, kSample, kSchedule, kEval };
constexpr std::uint64_t kServer = 0xffffffffULL;

struct Client {
  NodeData data;
  Rng rng;
};

}  // namespace

void validate(const FlConfig& cfg) {
  if (!(cfg.client_fraction > 0.0 && cfg.client_fraction <= 1.0))
    throw std::invalid_argument("client_fraction must lie in (0, 1]");
  if (!(cfg.meta_eps >= 0.0 && cfg.meta_eps <= 1.0))
    throw std::invalid_argument("meta_eps must lie in [0, 1]");
  if (cfg.ks.empty()) throw std::invalid_argument("k_list must not be empty");
  if (cfg.model.num_items == 0) throw std::invalid_argument("model has no items");
}

std::size_t clients_per_round(double client_fraction, std::size_t n) {
  if (n == 0) return 0;
  const auto m = static_cast<std::size_t>(std::ceil(client_fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(m, 1, n);
}

ParamVector fedavg_aggregate(std::span<const ParamVector> models,
                             std::span<const std::uint64_t> weights) {
  if (models.empty() || models.size() != weights.size())
    throw std::invalid_argument("fedavg_aggregate: need one weight per model");
  double total = 0.0;
  for (auto w : weights) total += static_cast<double>(w);
  if (total <= 0.0) throw std::invalid_argument("fedavg_aggregate: weights sum to zero");
  ParamVector out = models[0];
  auto o = out.values();
  std::fill(o.begin(), o.end(), 0.0);
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (!models[m].same_layout(out)) throw ProtocolError("fedavg_aggregate: layout mismatch");
    const double a = static_cast<double>(weights[m]) / total;
    const auto v = models[m].values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += a * v[i];
  }
  return out;
}

Rng finetune_rng(std::uint64_t seed, NodeId node) { return Rng(derive_seed(seed, node, kEval)); }

namespace {

FlResult run_federated(const FlConfig& cfg, const std::vector<NodeSplit>& splits,
                       const RoundHook& hook, bool personalize_nodes) {
  validate(cfg);
  const unsigned threads = resolve_threads(cfg.threads);
  FlResult res;
  auto& report = res.report;
  report.family = cfg.model.family;
  report.ks = cfg.ks;
  report.status = "completed";

  std::vector<Client> clients;
  for (const auto& s : splits) {
    if (s.train.empty()) {
      ++report.excluded_nodes;
      continue;
    }
    const auto i = clients.size();
    clients.push_back(Client{make_node_data(s), Rng(derive_seed(cfg.seed, i, kTrain))});
    Rng init(derive_seed(cfg.seed, i, kInit));
    res.users.push_back(init_user(cfg.model, init));
    auto& nr = report.nodes.emplace_back();
    nr.node = static_cast<NodeId>(i);
    nr.user = s.user;
  }
  const auto n = clients.size();
  Rng server(derive_seed(cfg.seed, kServer, kInit));
  res.global = init_model(cfg.model, 0, 0, server);
  if (n == 0) return res;

  Rng sampler(derive_seed(cfg.seed, kServer, kSample));
  const auto m = clients_per_round(cfg.client_fraction, n);
  const auto bytes = serialized_size(res.global);
  std::vector<ParamVector> returned(m);
  std::vector<std::uint64_t> weights(m);
  for (std::size_t round = 0; round < cfg.total_rounds; ++round) {
    std::vector<NodeId> chosen;
    for (auto idx : sampler.sample_indices(n, m)) chosen.push_back(static_cast<NodeId>(idx));
    std::sort(chosen.begin(), chosen.end());
    parallel_for(m, threads, [&](std::size_t c) {
      const auto id = chosen[c];
      auto& cl = clients[id];
      auto& nr = report.nodes[id];
      GossipModel local = res.global;
      local.owner = id;
      local.sample_count = cl.data.train_size;
      const auto t0 = Clock::now();
      for (std::size_t e = 0; e < cfg.local_epochs; ++e) {
        nr.sgd_steps += train_epoch(cfg.model, local, res.users[id], cl.data, cl.rng).steps;
        ++nr.epochs;
      }
      nr.sgd_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
      returned[c] = std::move(local.params);
      weights[c] = cl.data.train_size;
    });
    const auto t0 = Clock::now();
    res.global.params = fedavg_aggregate(returned, weights);
    res.global.age.count += cfg.local_epochs;
    const double agg = std::chrono::duration<double>(Clock::now() - t0).count();
    for (auto id : chosen) {
      auto& nr = report.nodes[id];
      ++nr.rounds;
      ++nr.messages_sent;
      nr.bytes_sent += bytes;
      ++report.messages_sent;
      ++report.messages_delivered;
      report.bytes_sent += bytes;
    }
    // server-side cost is shared evenly by the round's participants
    for (auto id : chosen) report.nodes[id].aggregation_seconds += agg / static_cast<double>(m);
    if (hook) hook(round, chosen, returned, res.global.params);
  }
  report.end_time = static_cast<double>(cfg.total_rounds);

  if (personalize_nodes) res.personalized.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& cl = clients[i];
    auto& nr = report.nodes[i];
    const ParamVector* shared = &res.global.params;
    if (personalize_nodes) {
      auto rng = finetune_rng(cfg.seed, static_cast<NodeId>(i));
      auto p = personalize(cfg.model, res.global, res.users[i], cl.data, cfg.meta_eps,
                           cfg.finetune_epochs, rng);
      res.personalized[i] = std::move(p.shared);
      res.users[i] = std::move(p.user);
      shared = &res.personalized[i];
    }
    nr.metrics = evaluate_node(cfg.model, *shared, res.users[i], cl.data.test, cfg.ks);
    if (!cl.data.weighting.empty())
      nr.weighting_metric = evaluate_on_weighting_set(cfg.model, *shared, res.users[i],
                                                      cl.data.weighting, cfg.weighting_k);
  });
  return res;
}

}  // namespace

FlResult fl_run(const FlConfig& cfg, const std::vector<NodeSplit>& splits, const RoundHook& hook) {
  return run_federated(cfg, splits, hook, false);
}

FlResult reptile_run(const FlConfig& cfg, const std::vector<NodeSplit>& splits,
                     const RoundHook& hook) {
  return run_federated(cfg, splits, hook, true);
}

}  // namespace gossiprec
