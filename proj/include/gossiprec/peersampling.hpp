#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "gossiprec/param_vector.hpp"
#include "gossiprec/rng.hpp"

namespace gossiprec {

enum class SamplerKind { random, personalized };

SamplerKind parse_sampler(std::string_view name);
std::string_view to_string(SamplerKind k) noexcept;

/// Peers a node pushes its model to. No duplicates, never the owner.
struct View {
  std::vector<NodeId> peers;
  std::size_t capacity = 0;

  bool contains(NodeId id) const noexcept;
};

struct LedgerEntry {
  NodeId node = 0;
  double perf = 0.0;
  double last_update = 0.0;  ///< simulated seconds

  bool operator==(const LedgerEntry&) const = default;
};

/// Most recent performance of each past sender's model, kept sorted by
/// perf descending, then most recent update, then ascending node id.
class PerfLedger {
 public:
  /// Replaces any previous entry of `sender`. Throws std::domain_error
  /// unless perf lies in [0, 1].
  void record(NodeId sender, double perf, double now);

  /// The first min(t, size) entries.
  std::vector<NodeId> top(std::size_t t) const;

  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<LedgerEntry> entries_;
};

/// Free-function form of PerfLedger::record.
inline void ledger_record(PerfLedger& ledger, NodeId sender, double perf, double now) {
  ledger.record(sender, perf, now);
}

/// Number of exploitation slots: (1 - alpha) * v, halves rounded up.
std::size_t exploitation_slots(double alpha, std::size_t v);

/// v distinct nodes from [0, num_nodes) other than `self`.
View random_view(NodeId self, std::size_t num_nodes, std::size_t v, Rng& rng);

/// Personalized refresh: the top exploitation_slots(alpha, v) ledger nodes
/// plus random exploration peers drawn from the current peers' known views,
/// topped up from the whole network when those run short. Exploration peers
/// come first in the result.
View update_view(NodeId self, const View& current, const PerfLedger& ledger, double alpha,
                 const std::map<NodeId, std::vector<NodeId>>& neighbor_views,
                 std::size_t num_nodes, Rng& rng);

}  // namespace gossiprec
