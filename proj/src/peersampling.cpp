#include "gossiprec/peersampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gossiprec {

SamplerKind parse_sampler(std::string_view name) {
  if (name == "random") return SamplerKind::random;
  if (name == "personalized") return SamplerKind::personalized;
  throw std::invalid_argument("unknown sampler: " + std::string(name));
}

std::string_view to_string(SamplerKind k) noexcept {
  return k == SamplerKind::random ? "random" : "personalized";
}

bool View::contains(NodeId id) const noexcept {
  return std::find(peers.begin(), peers.end(), id) != peers.end();
}

namespace {
bool ranks_before(const LedgerEntry& a, const LedgerEntry& b) {
  if (a.perf != b.perf) return a.perf > b.perf;
  if (a.last_update != b.last_update) return a.last_update > b.last_update;
  return a.node < b.node;
}
}  // namespace

void PerfLedger::record(NodeId sender, double perf, double now) {
  if (!(perf >= 0.0 && perf <= 1.0)) throw std::domain_error("ledger: perf outside [0, 1]");
  std::erase_if(entries_, [&](const LedgerEntry& e) { return e.node == sender; });
  const LedgerEntry e{sender, perf, now};
  entries_.insert(std::upper_bound(entries_.begin(), entries_.end(), e, ranks_before), e);
}

std::vector<NodeId> PerfLedger::top(std::size_t t) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < std::min(t, entries_.size()); ++i) out.push_back(entries_[i].node);
  return out;
}

std::size_t exploitation_slots(double alpha, std::size_t v) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in [0, 1]");
  // round() rounds halves away from zero; the epsilon absorbs representation error
  const double t = std::round((1.0 - alpha) * static_cast<double>(v) + 1e-9);
  return std::min(v, static_cast<std::size_t>(t));
}

View random_view(NodeId self, std::size_t num_nodes, std::size_t v, Rng& rng) {
  if (num_nodes == 0 || num_nodes - 1 < v)
    throw std::invalid_argument("random_view: not enough nodes for the requested view");
  View view;
  view.capacity = v;
  for (auto idx : rng.sample_indices(num_nodes - 1, v)) {
    const auto id = static_cast<NodeId>(idx);
    view.peers.push_back(id >= self ? id + 1 : id);
  }
  return view;
}

View update_view(NodeId self, const View& current, const PerfLedger& ledger, double alpha,
                 const std::map<NodeId, std::vector<NodeId>>& neighbor_views,
                 std::size_t num_nodes, Rng& rng) {
  const std::size_t v = current.capacity;
  if (v == 0) throw std::invalid_argument("update_view: view capacity is zero");
  if (num_nodes == 0 || num_nodes - 1 < v)
    throw std::invalid_argument("update_view: not enough nodes for the requested view");

  std::vector<NodeId> exploit;
  for (NodeId id : ledger.top(exploitation_slots(alpha, v)))
    if (id != self && id < num_nodes) exploit.push_back(id);
  std::vector<NodeId> chosen = exploit;
  auto taken = [&](NodeId id) {
    return id == self || std::find(chosen.begin(), chosen.end(), id) != chosen.end();
  };

  std::vector<NodeId> pool;
  for (NodeId peer : current.peers) {
    auto it = neighbor_views.find(peer);
    if (it == neighbor_views.end()) continue;
    for (NodeId id : it->second)
      if (id < num_nodes && !taken(id)) pool.push_back(id);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  const std::size_t want = v - exploit.size();
  std::vector<NodeId> explore;
  const std::size_t from_pool = std::min(want, pool.size());
  for (auto idx : rng.sample_indices(pool.size(), from_pool)) {
    explore.push_back(pool[idx]);
    chosen.push_back(pool[idx]);
  }
  while (explore.size() < want) {
    const auto id = static_cast<NodeId>(rng.uniform_index(num_nodes));
    if (taken(id)) continue;
    explore.push_back(id);
    chosen.push_back(id);
  }

  View out;
  out.capacity = v;
  out.peers = explore;
  out.peers.insert(out.peers.end(), exploit.begin(), exploit.end());
  return out;
}

}  // namespace gossiprec
