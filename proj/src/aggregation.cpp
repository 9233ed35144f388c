#include "gossiprec/aggregation.hpp"

#include <algorithm>
#include <stdexcept>

namespace gossiprec {

AggregatorKind parse_aggregator(std::string_view name) {
  if (name == "fedavg") return AggregatorKind::fedavg;
  if (name == "age") return AggregatorKind::age;
  if (name == "performance") return AggregatorKind::performance;
  if (name == "reptile-decentralized") return AggregatorKind::reptile_decentralized;
  throw std::invalid_argument("unknown aggregator: " + std::string(name));
}

std::string_view to_string(AggregatorKind k) noexcept {
  switch (k) {
    case AggregatorKind::fedavg: return "fedavg";
    case AggregatorKind::age: return "age";
    case AggregatorKind::performance: return "performance";
    case AggregatorKind::reptile_decentralized: return "reptile-decentralized";
  }
  return "?";
}

namespace {
void require_same_layout(const ParamVector& a, const ParamVector& b) {
  if (!a.same_layout(b) || a.size() != b.size())
    throw ProtocolError("parameter layouts differ");
}
}  // namespace

MergeResult weighted_merge(const ParamVector& m1, const ParamVector& m2, double w1, double w2) {
  require_same_layout(m1, m2);
  if (!(w1 >= 0.0) || !(w2 >= 0.0)) throw ProtocolError("aggregation weights must be >= 0");
  MergeResult r;
  double a1 = 0.5, a2 = 0.5;
  if (w1 + w2 > 0.0) {
    a1 = w1 / (w1 + w2);
    a2 = w2 / (w1 + w2);
  } else {
    r.degenerate = true;
  }
  r.params = m1;
  auto out = r.params.values();
  const auto x = m1.values(), y = m2.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a1 * x[i] + a2 * y[i];
  return r;
}

MergeResult decentralized_fedavg(const ParamVector& m1, const ParamVector& m2,
                                 std::uint64_t n1, std::uint64_t n2) {
  return weighted_merge(m1, m2, static_cast<double>(n1), static_cast<double>(n2));
}

MergeResult model_age_based(const ParamVector& m1, const ParamVector& m2, ModelAge age1,
                            ModelAge age2) {
  return weighted_merge(m1, m2, static_cast<double>(age1.count), static_cast<double>(age2.count));
}

ParamVector reptile_step(const ParamVector& init, const ParamVector& locally_trained,
                         double eps) {
  require_same_layout(init, locally_trained);
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("reptile_step: eps must lie in [0, 1]");
  if (eps == 1.0) return locally_trained;
  ParamVector out = init;
  auto o = out.values();
  const auto a = init.values(), b = locally_trained.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + eps * (b[i] - a[i]);
  return out;
}

Personalized personalize(const ModelSpec& spec, const GossipModel& global,
                         std::span<const double> user, const NodeData& data, double eps,
                         std::size_t epochs, Rng& rng) {
  GossipModel local = global;
  Personalized out;
  out.user.assign(user.begin(), user.end());
  for (std::size_t e = 0; e < epochs; ++e) train_epoch(spec, local, out.user, data, rng);
  out.shared = reptile_step(global.params, local.params, eps);
  return out;
}

double evaluate_on_weighting_set(const ModelSpec& spec, const ParamVector& shared,
                                 std::span<const double> user, const EvalSet& weighting, int k) {
  if (weighting.empty()) throw std::invalid_argument("empty weighting set");
  const int ks[] = {k};
  const auto m = evaluate_node(spec, shared, user, weighting, ks);
  return headline_metric(spec.family, m, k);
}

AggregationOutcome performance_based_aggregate(const ModelSpec& spec, const GossipModel& local,
                                               const GossipModel& received,
                                               std::span<const double> user,
                                               const EvalSet& weighting, int k) {
  require_same_layout(local.params, received.params);
  AggregationOutcome out;
  out.received_perf = evaluate_on_weighting_set(spec, received.params, user, weighting, k);
  out.local_perf = evaluate_on_weighting_set(spec, local.params, user, weighting, k);
  auto merged = weighted_merge(local.params, received.params, out.local_perf, out.received_perf);
  out.degenerate = merged.degenerate;
  out.merged.params = std::move(merged.params);
  out.merged.owner = local.owner;
  out.merged.sample_count = local.sample_count;
  out.merged.age = std::max(local.age, received.age);
  return out;
}

}  // namespace gossiprec
