#include "gossiprec/recommender.hpp"

#include <algorithm>
#include <stdexcept>

#include "gossiprec/ranking.hpp"

namespace gossiprec {

ModelFamily parse_model_family(std::string_view name) {
  if (name == "gmf") return ModelFamily::gmf;
  if (name == "prmeg") return ModelFamily::prmeg;
  throw std::invalid_argument("unknown model: " + std::string(name));
}

std::string_view to_string(ModelFamily f) noexcept {
  return f == ModelFamily::gmf ? "gmf" : "prmeg";
}

NodeData make_node_data(const NodeSplit& split) {
  NodeData d;
  d.user = split.user;
  d.train_size = split.train.size();
  for (const auto& r : split.train) d.positives.push_back(r.item);
  d.seen_sorted = d.positives;
  for (const auto& r : split.weighting) d.seen_sorted.push_back(r.item);
  for (const auto& r : split.test) d.seen_sorted.push_back(r.item);
  d.seen_sorted.insert(d.seen_sorted.end(), split.interacted.begin(), split.interacted.end());
  std::sort(d.seen_sorted.begin(), d.seen_sorted.end());
  d.seen_sorted.erase(std::unique(d.seen_sorted.begin(), d.seen_sorted.end()),
                      d.seen_sorted.end());
  for (std::size_t i = 1; i < split.train.size(); ++i)
    d.transitions.push_back({split.train[i - 1].item, split.train[i].item});
  d.transition_index = prmeg::TransitionIndex(d.transitions);
  const ItemId prev = split.train.empty() ? 0 : split.train.back().item;
  for (const auto& r : split.test) d.test.targets.push_back(r.item);
  d.test.pools = split.test_negatives;
  d.test.context_prev = prev;
  for (const auto& r : split.weighting) d.weighting.targets.push_back(r.item);
  d.weighting.pools = split.weighting_negatives;
  d.weighting.context_prev = prev;
  return d;
}

GossipModel init_model(const ModelSpec& spec, NodeId owner, std::uint64_t sample_count,
                       Rng& rng) {
  GossipModel m;
  m.owner = owner;
  m.sample_count = sample_count;
  m.params = spec.family == ModelFamily::gmf ? gmf::make_params(spec.num_items, spec.gmf, rng)
                                             : prmeg::make_params(spec.num_items, spec.prmeg, rng);
  return m;
}

std::vector<double> init_user(const ModelSpec& spec, Rng& rng) {
  return spec.family == ModelFamily::gmf ? gmf::make_user(spec.gmf, rng)
                                         : prmeg::make_user(spec.prmeg, rng);
}

TrainResult train_epoch(const ModelSpec& spec, GossipModel& model, std::span<double> user,
                        const NodeData& data, Rng& rng) {
  TrainResult out;
  if (spec.family == ModelFamily::gmf) {
    const auto r = gmf::train_epoch(model, user, data.positives, data.seen_sorted, spec.gmf, rng);
    out.steps = r.steps;
    out.skipped = r.skipped;
  } else {
    const auto r = prmeg::train_epoch(model, user, data.transitions, data.transition_index,
                                      spec.geo, spec.prmeg, rng);
    out.steps = r.steps;
    out.skipped = r.skipped;
  }
  return out;
}

void score(const ModelSpec& spec, const ParamVector& shared, std::span<const double> user,
           ItemId context_prev, std::span<const ItemId> cands, std::span<double> out) {
  if (out.size() != cands.size()) throw std::invalid_argument("score: output size mismatch");
  if (spec.family == ModelFamily::gmf) {
    gmf::score(shared, user, cands, out);
  } else {
    prmeg::score_candidates(shared, user, context_prev, cands, spec.geo, spec.prmeg.tau_km, out);
  }
}

std::vector<ItemId> rank_items(const ModelSpec& spec, const ParamVector& shared,
                               std::span<const double> user, ItemId context_prev,
                               std::span<const ItemId> cands, std::size_t k) {
  if (cands.empty()) throw std::invalid_argument("rank_items: no candidates");
  std::vector<double> s(cands.size());
  score(spec, shared, user, context_prev, cands, s);
  return top_k(cands, s, k);
}

}  // namespace gossiprec
