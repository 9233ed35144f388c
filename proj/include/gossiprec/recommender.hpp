#pragma once

#include <span>
#include <string>
#include <vector>

#include "gossiprec/data.hpp"
#include "gossiprec/gmf.hpp"
#include "gossiprec/prmeg.hpp"

// Model-family dispatch: one entry point per operation the protocols need,
// whichever recommendation model is configured.
namespace gossiprec {

enum class ModelFamily { gmf, prmeg };

ModelFamily parse_model_family(std::string_view name);
std::string_view to_string(ModelFamily f) noexcept;

struct ModelSpec {
  ModelFamily family = ModelFamily::gmf;
  gmf::Config gmf;
  prmeg::Config prmeg;
  std::size_t num_items = 0;
  std::vector<GeoPoint> geo;  ///< per item; empty when unknown
};

/// Ranking lists for one node: each target is ranked against its own pool.
struct EvalSet {
  std::vector<ItemId> targets;
  std::vector<std::vector<ItemId>> pools;
  /// Location the next visit starts from (sequential models only).
  ItemId context_prev = 0;

  bool empty() const noexcept { return targets.empty(); }
};

/// Everything a node derives from its split for training and evaluation.
struct NodeData {
  UserId user = 0;
  std::vector<ItemId> positives;    ///< training items
  std::vector<ItemId> seen_sorted;  ///< every item the user interacted with; never a negative
  std::vector<prmeg::Transition> transitions;
  prmeg::TransitionIndex transition_index{std::span<const prmeg::Transition>{}};
  EvalSet test;
  EvalSet weighting;
  std::size_t train_size = 0;
};

NodeData make_node_data(const NodeSplit& split);

GossipModel init_model(const ModelSpec& spec, NodeId owner, std::uint64_t sample_count, Rng& rng);
std::vector<double> init_user(const ModelSpec& spec, Rng& rng);

struct TrainResult {
  std::size_t steps = 0;
  bool skipped = false;
};

/// One local epoch on the node's training data; increments the model age.
TrainResult train_epoch(const ModelSpec& spec, GossipModel& model, std::span<double> user,
                        const NodeData& data, Rng& rng);

/// Higher-is-better scores for `cands` (GMF logit, negated PRME-G distance).
void score(const ModelSpec& spec, const ParamVector& shared, std::span<const double> user,
           ItemId context_prev, std::span<const ItemId> cands, std::span<double> out);

/// Top-k of `cands` under the model; ties by ascending id.
std::vector<ItemId> rank_items(const ModelSpec& spec, const ParamVector& shared,
                               std::span<const double> user, ItemId context_prev,
                               std::span<const ItemId> cands, std::size_t k);

}  // namespace gossiprec
