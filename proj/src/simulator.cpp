#include "gossiprec/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <stdexcept>

#include "gossiprec/convergence.hpp"
#include "gossiprec/parallel.hpp"

namespace gossiprec {

namespace {

using Clock = std::chrono::steady_clock;

// per-node random streams
enum Stream : std::uint64_t { kInit = 1, kTrain, kNet, kSample, kSchedule, kEval };
constexpr std::uint64_t kCommonInit = 0xfffffffeULL;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Message {
  GossipModel model;
  std::vector<NodeId> sender_view;
  std::size_t bytes = 0;
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::push;
  NodeId node = 0;
  NodeId from = 0;
  std::shared_ptr<const Message> msg;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct Node {
  NodeData data;
  std::vector<double> user;
  GossipModel model;
  View view;
  PerfLedger ledger;
  std::map<NodeId, std::vector<NodeId>> known_views;
  Rng train_rng, net_rng, sample_rng;
  double period = 0.0;
  double upload_rate = 0.0;
  ConvergenceTracker tracker;
  NodeReport report;
};

struct Evaluation {
  NodeMetrics metrics;
  double weighting = 0.0;
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, const std::vector<NodeSplit>& splits)
      : cfg_(cfg), threads_(resolve_threads(cfg.threads)) {
    report_.family = cfg.model.family;
    report_.ks = cfg.ks;
    for (const auto& s : splits) {
      if (s.train.empty()) {
        ++report_.excluded_nodes;
        continue;
      }
      auto& n = nodes_.emplace_back();
      n.data = make_node_data(s);
    }
    setup();
  }

  RunReport run();

 private:
  void setup();
  void schedule(double time, EventKind kind, NodeId node, NodeId from = 0,
                std::shared_ptr<const Message> msg = nullptr) {
    queue_.push(Event{time, next_seq_++, kind, node, from, std::move(msg)});
  }
  void train(Node& n, std::size_t epochs);
  void on_push(const Event& ev);
  void on_deliver(const Event& ev);
  void on_view_update(const Event& ev);
  bool on_checkpoint(const Event& ev);
  std::vector<Evaluation> evaluate_all(std::size_t index);

  const SimConfig& cfg_;
  unsigned threads_;
  std::vector<Node> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  RunReport report_;
  bool dirty_ = true;
};

void Simulation::setup() {
  const auto num = nodes_.size();
  const std::size_t v = num > 0 ? std::min(cfg_.view_size, num - 1) : 0;
  for (std::size_t i = 0; i < num; ++i) {
    auto& n = nodes_[i];
    const auto id = static_cast<NodeId>(i);
    n.train_rng = Rng(derive_seed(cfg_.seed, i, kTrain));
    n.net_rng = Rng(derive_seed(cfg_.seed, i, kNet));
    n.sample_rng = Rng(derive_seed(cfg_.seed, i, kSample));
    Rng init(derive_seed(cfg_.seed, i, kInit));
    if (cfg_.shared_init) {
      Rng common(derive_seed(cfg_.seed, kCommonInit, kInit));
      n.model = init_model(cfg_.model, id, n.data.train_size, common);
    } else {
      n.model = init_model(cfg_.model, id, n.data.train_size, init);
    }
    n.user = init_user(cfg_.model, init);
    n.tracker = ConvergenceTracker(cfg_.convergence_window, cfg_.convergence_delta);
    n.report.node = id;
    n.report.user = n.data.user;
    if (v > 0) {
      n.view = random_view(id, num, v, n.sample_rng);
    } else {
      n.view.capacity = 0;
    }
    Rng sched(derive_seed(cfg_.seed, i, kSchedule));
    n.period = cfg_.push_period * (1.0 + sched.uniform(-cfg_.push_jitter, cfg_.push_jitter));
    n.upload_rate = sched.uniform(cfg_.upload_min, cfg_.upload_max);
    schedule(sched.uniform(0.0, n.period), EventKind::push, id);
    if (v > 0)
      schedule(cfg_.peer_sampling_period * (1.0 - sched.uniform01()), EventKind::view_update, id);
  }
  parallel_for(num, threads_, [&](std::size_t i) { train(nodes_[i], cfg_.initial_epochs); });
  if (num > 0) schedule(cfg_.checkpoint_period, EventKind::checkpoint, 0);
}

void Simulation::train(Node& n, std::size_t epochs) {
  const auto t0 = Clock::now();
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto r = train_epoch(cfg_.model, n.model, n.user, n.data, n.train_rng);
    n.report.sgd_steps += r.steps;
    ++n.report.epochs;
  }
  n.report.sgd_seconds += seconds_since(t0);
}

void Simulation::on_push(const Event& ev) {
  auto& n = nodes_[ev.node];
  ++n.report.rounds;
  if (n.view.peers.empty()) {
    // alone in the network: keep learning from local data
    train(n, cfg_.epochs_per_receipt);
  } else {
    auto msg = std::make_shared<Message>();
    msg->model = n.model;
    msg->sender_view = n.view.peers;
    msg->bytes = serialized_size(n.model);
    for (NodeId peer : n.view.peers) {
      const double delay =
          n.net_rng.exponential(cfg_.base_delay) + static_cast<double>(msg->bytes) / n.upload_rate;
      double at = ev.time + delay;
      if (!(at > ev.time)) at = std::nextafter(ev.time, std::numeric_limits<double>::infinity());
      schedule(at, EventKind::deliver, peer, ev.node, msg);
      ++n.report.messages_sent;
      n.report.bytes_sent += msg->bytes;
      ++report_.messages_sent;
      report_.bytes_sent += msg->bytes;
    }
  }
  schedule(ev.time + n.period, EventKind::push, ev.node);
}

void Simulation::on_deliver(const Event& ev) {
  auto& n = nodes_[ev.node];
  const GossipModel& received = ev.msg->model;
  ++n.report.messages_received;
  ++report_.messages_delivered;
  n.known_views[ev.from] = ev.msg->sender_view;

  const auto t0 = Clock::now();
  const bool has_weighting = !n.data.weighting.empty();
  std::optional<double> perf_x;
  switch (cfg_.aggregator) {
    case AggregatorKind::performance: {
      if (has_weighting) {
        auto out = performance_based_aggregate(cfg_.model, n.model, received, n.user,
                                               n.data.weighting, cfg_.weighting_k);
        perf_x = out.received_perf;
        if (out.degenerate) ++n.report.degenerate_merges;
        n.model = std::move(out.merged);
      } else {
        // nothing to score against: fall back to sample-count weighting
        auto m = decentralized_fedavg(n.model.params, received.params, n.model.sample_count,
                                      received.sample_count);
        if (m.degenerate) ++n.report.degenerate_merges;
        n.model.params = std::move(m.params);
        n.model.age = std::max(n.model.age, received.age);
      }
      break;
    }
    case AggregatorKind::age: {
      auto m = model_age_based(n.model.params, received.params, n.model.age, received.age);
      if (m.degenerate) ++n.report.degenerate_merges;
      n.model.params = std::move(m.params);
      n.model.age = std::max(n.model.age, received.age);
      break;
    }
    case AggregatorKind::fedavg:
    case AggregatorKind::reptile_decentralized: {
      auto m = decentralized_fedavg(n.model.params, received.params, n.model.sample_count,
                                    received.sample_count);
      if (m.degenerate) ++n.report.degenerate_merges;
      n.model.params = std::move(m.params);
      n.model.age = std::max(n.model.age, received.age);
      break;
    }
  }
  if (cfg_.sampler == SamplerKind::personalized) {
    if (!perf_x && has_weighting)
      perf_x = evaluate_on_weighting_set(cfg_.model, received.params, n.user, n.data.weighting,
                                         cfg_.weighting_k);
    n.ledger.record(ev.from, perf_x.value_or(0.0), ev.time);
  }
  ++n.report.merges;
  n.report.aggregation_seconds += seconds_since(t0);

  train(n, cfg_.epochs_per_receipt);
}

void Simulation::on_view_update(const Event& ev) {
  auto& n = nodes_[ev.node];
  if (cfg_.sampler == SamplerKind::random) {
    n.view = random_view(ev.node, nodes_.size(), n.view.capacity, n.sample_rng);
  } else {
    n.view = update_view(ev.node, n.view, n.ledger, cfg_.alpha, n.known_views, nodes_.size(),
                         n.sample_rng);
  }
  schedule(ev.time + cfg_.peer_sampling_period, EventKind::view_update, ev.node);
}

std::vector<Evaluation> Simulation::evaluate_all(std::size_t index) {
  std::vector<Evaluation> out(nodes_.size());
  parallel_for(nodes_.size(), threads_, [&](std::size_t i) {
    const auto& n = nodes_[i];
    const ParamVector* shared = &n.model.params;
    std::span<const double> user = n.user;
    Personalized personal;
    if (cfg_.aggregator == AggregatorKind::reptile_decentralized) {
      Rng rng(derive_seed(derive_seed(cfg_.seed, i, kEval), index));
      personal = personalize(cfg_.model, n.model, n.user, n.data, cfg_.meta_eps,
                             cfg_.finetune_epochs, rng);
      shared = &personal.shared;
      user = personal.user;
    }
    out[i].metrics = evaluate_node(cfg_.model, *shared, user, n.data.test, cfg_.ks);
    if (!n.data.weighting.empty())
      out[i].weighting = evaluate_on_weighting_set(cfg_.model, *shared, user, n.data.weighting,
                                                   cfg_.weighting_k);
  });
  return out;
}

bool Simulation::on_checkpoint(const Event& ev) {
  for (const auto& n : nodes_)
    if (!n.model.params.all_finite() ||
        !std::all_of(n.user.begin(), n.user.end(), [](double x) { return std::isfinite(x); }))
      throw std::runtime_error("model of node " + std::to_string(n.report.node) +
                               " has non-finite parameters at t=" + std::to_string(ev.time) +
                               "; lower the learning rate");
  const std::size_t index = ++report_.checkpoints;
  const auto evals = evaluate_all(index);
  bool all_converged = true;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    TrajectoryRow row;
    row.checkpoint = index;
    row.time = ev.time;
    row.node = static_cast<NodeId>(i);
    row.rounds = n.report.rounds;
    row.weighting_metric = evals[i].weighting;
    row.values = metric_values(cfg_.model.family, evals[i].metrics);
    report_.trajectory.push_back(std::move(row));

    n.report.metrics = evals[i].metrics;
    n.report.weighting_metric = evals[i].weighting;
    if (!n.tracker.converged() && n.tracker.observe(evals[i].weighting, n.report.rounds))
      n.report.rounds_at_convergence = n.tracker.rounds_at_convergence();
    all_converged = all_converged && n.tracker.converged();
  }
  dirty_ = false;
  schedule(ev.time + cfg_.checkpoint_period, EventKind::checkpoint, 0);
  return cfg_.stop_at_convergence && all_converged;
}

RunReport Simulation::run() {
  report_.status = "horizon";
  while (true) {
    if (queue_.empty()) {
      report_.status = "deadlock";
      break;
    }
    if (queue_.top().time > cfg_.max_sim_time) break;
    const Event ev = queue_.top();
    queue_.pop();
    ++report_.events;
    report_.end_time = ev.time;
    if (cfg_.trace) report_.trace.push_back(TraceEvent{ev.time, ev.seq, ev.kind, ev.node, ev.from});
    switch (ev.kind) {
      case EventKind::push:
        on_push(ev);
        dirty_ = true;
        break;
      case EventKind::deliver:
        on_deliver(ev);
        dirty_ = true;
        break;
      case EventKind::view_update:
        on_view_update(ev);
        break;
      case EventKind::checkpoint:
        if (on_checkpoint(ev)) {
          report_.status = "converged";
          goto done;
        }
        break;
    }
  }
done:
  if (dirty_) {
    const auto evals = evaluate_all(report_.checkpoints + 1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      nodes_[i].report.metrics = evals[i].metrics;
      nodes_[i].report.weighting_metric = evals[i].weighting;
    }
  }
  for (auto& n : nodes_) report_.nodes.push_back(n.report);
  return std::move(report_);
}

}  // namespace

void validate(const SimConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(cfg.push_period > 0.0, "push_period must be positive");
  require(cfg.push_jitter >= 0.0 && cfg.push_jitter < 1.0, "push_jitter must lie in [0, 1)");
  require(cfg.peer_sampling_period > 0.0, "peer_sampling_period must be positive");
  require(cfg.checkpoint_period > 0.0, "checkpoint_period must be positive");
  require(cfg.max_sim_time >= 0.0, "max_sim_time must be non-negative");
  require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "alpha must lie in [0, 1]");
  require(cfg.view_size >= 1, "view_size must be at least 1");
  require(cfg.convergence_window >= 1, "convergence_window must be at least 1");
  require(cfg.convergence_delta >= 0.0, "convergence_delta must be non-negative");
  require(!cfg.ks.empty(), "k_list must not be empty");
  for (int k : cfg.ks) require(k > 0, "k_list entries must be positive");
  require(cfg.weighting_k > 0, "weighting_k must be positive");
  require(cfg.base_delay >= 0.0, "base_delay must be non-negative");
  require(cfg.upload_min > 0.0 && cfg.upload_max >= cfg.upload_min,
          "upload rates must satisfy 0 < upload_min <= upload_max");
  require(cfg.meta_eps >= 0.0 && cfg.meta_eps <= 1.0, "meta_eps must lie in [0, 1]");
  require(cfg.model.num_items > 0, "model has no items");
}

RunReport run_simulation(const SimConfig& cfg, const std::vector<NodeSplit>& splits) {
  validate(cfg);
  Simulation sim(cfg, splits);
  return sim.run();
}

}  // namespace gossiprec
