#include "gossiprec/gmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gossiprec/mathutil.hpp"

namespace gossiprec::gmf {

ParamVector make_params(std::size_t num_items, const Config& cfg, Rng& rng) {
  ParamVector p;
  p.add_segment(kItemSegment, num_items * cfg.dim);
  p.add_segment(kWeightSegment, cfg.dim);
  p.add_segment(kBiasSegment, 1);
  for (double& v : p.segment(kItemSegment)) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
  const double s = cfg.output_init_gain * std::sqrt(3.0 / static_cast<double>(cfg.dim));
  for (double& v : p.segment(kWeightSegment)) v = rng.uniform(-s, s);
  return p;
}

std::vector<double> make_user(const Config& cfg, Rng& rng) {
  std::vector<double> u(cfg.dim);
  for (double& v : u) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
  return u;
}

std::size_t num_items(const ParamVector& shared, std::size_t dim) {
  return shared.segment(kItemSegment).size() / dim;
}

namespace {

std::span<const double> item_row(const ParamVector& shared, std::size_t dim, ItemId item) {
  auto table = shared.segment(kItemSegment);
  if (static_cast<std::size_t>(item) * dim + dim > table.size())
    throw std::domain_error("gmf: unknown item id " + std::to_string(item));
  return table.subspan(static_cast<std::size_t>(item) * dim, dim);
}

std::size_t checked_dim(const ParamVector& shared, std::span<const double> user) {
  const std::size_t dim = shared.segment(kWeightSegment).size();
  if (user.size() != dim) throw std::invalid_argument("gmf: user embedding dimension mismatch");
  return dim;
}

}  // namespace

double logit(const ParamVector& shared, std::span<const double> user, ItemId item) {
  const std::size_t dim = checked_dim(shared, user);
  const auto q = item_row(shared, dim, item);
  const auto h = shared.segment(kWeightSegment);
  double s = shared.segment(kBiasSegment)[0];
  for (std::size_t k = 0; k < dim; ++k) s += h[k] * user[k] * q[k];
  return s;
}

double forward(const ParamVector& shared, std::span<const double> user, ItemId item) {
  // keep the open interval even where the logistic saturates in double precision
  const double p = sigmoid(logit(shared, user, item));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double example_loss(const ParamVector& shared, std::span<const double> user, ItemId item,
                    double label) {
  return bce_from_logit(logit(shared, user, item), label);
}

ExampleGradient example_gradient(const ParamVector& shared, std::span<const double> user,
                                 ItemId item, double label) {
  const std::size_t dim = checked_dim(shared, user);
  const auto q = item_row(shared, dim, item);
  const auto h = shared.segment(kWeightSegment);
  const double s = logit(shared, user, item);
  const double ds = sigmoid(s) - label;
  ExampleGradient g;
  g.user.resize(dim);
  g.item.resize(dim);
  g.weights.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    g.user[k] = ds * h[k] * q[k];
    g.item[k] = ds * h[k] * user[k];
    g.weights[k] = ds * user[k] * q[k];
  }
  g.bias = ds;
  g.loss = bce_from_logit(s, label);
  return g;
}

void score(const ParamVector& shared, std::span<const double> user,
           std::span<const ItemId> items, std::span<double> out) {
  const std::size_t dim = checked_dim(shared, user);
  const auto h = shared.segment(kWeightSegment);
  const double b = shared.segment(kBiasSegment)[0];
  double w[256];
  std::vector<double> heap;
  double* hw = w;
  if (dim > 256) {
    heap.resize(dim);
    hw = heap.data();
  }
  for (std::size_t k = 0; k < dim; ++k) hw[k] = h[k] * user[k];
  const auto table = shared.segment(kItemSegment);
  const std::size_t n_items = table.size() / dim;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] >= n_items) throw std::domain_error("gmf: unknown item id " + std::to_string(items[i]));
    const double* q = table.data() + static_cast<std::size_t>(items[i]) * dim;
    // four independent partial sums keep the FP adds pipelined
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t k = 0;
    for (; k + 4 <= dim; k += 4)
      for (std::size_t l = 0; l < 4; ++l) acc[l] += hw[k + l] * q[k + l];
    for (; k < dim; ++k) acc[0] += hw[k] * q[k];
    out[i] = b + ((acc[0] + acc[1]) + (acc[2] + acc[3]));
  }
}

namespace {

// In-place SGD step on one example; returns its loss before the step.
double sgd_step(ParamVector& shared, std::span<double> user, ItemId item, double label,
                const Config& cfg) {
  const std::size_t dim = cfg.dim;
  auto table = shared.segment(kItemSegment);
  auto q = table.subspan(static_cast<std::size_t>(item) * dim, dim);
  auto h = shared.segment(kWeightSegment);
  auto& b = shared.segment(kBiasSegment)[0];
  double s = b;
  for (std::size_t k = 0; k < dim; ++k) s += h[k] * user[k] * q[k];
  const double ds = sigmoid(s) - label;
  const double lr = cfg.lr;
  const double decay = 2.0 * cfg.l2;
  for (std::size_t k = 0; k < dim; ++k) {
    const double pk = user[k], qk = q[k], hk = h[k];
    user[k] = pk - lr * (ds * hk * qk + decay * pk);
    q[k] = qk - lr * (ds * hk * pk + decay * qk);
    h[k] = hk - lr * (ds * pk * qk);
  }
  b -= lr * ds;
  return bce_from_logit(s, label);
}

}  // namespace

EpochResult train_epoch(GossipModel& model, std::span<double> user,
                        std::span<const ItemId> positives,
                        std::span<const ItemId> seen_sorted, const Config& cfg, Rng& rng) {
  EpochResult r;
  if (positives.empty()) {
    r.skipped = true;
    return r;
  }
  if (cfg.neg_ratio < 1) throw std::invalid_argument("gmf: neg_ratio must be >= 1");
  const std::size_t dim = checked_dim(model.params, user);
  if (dim != cfg.dim) throw std::invalid_argument("gmf: config dim does not match parameters");
  const std::size_t n_items = num_items(model.params, dim);
  for (ItemId it : positives)
    if (it >= n_items) throw std::domain_error("gmf: unknown item id " + std::to_string(it));

  const bool has_unseen = seen_sorted.size() < n_items;
  std::vector<ItemId> order(positives.begin(), positives.end());
  rng.shuffle(order);
  double total = 0.0;
  for (ItemId pos : order) {
    total += sgd_step(model.params, user, pos, 1.0, cfg);
    ++r.steps;
    if (!has_unseen) continue;
    for (int j = 0; j < cfg.neg_ratio; ++j) {
      ItemId neg;
      do {
        neg = static_cast<ItemId>(rng.uniform_index(n_items));
      } while (std::binary_search(seen_sorted.begin(), seen_sorted.end(), neg));
      total += sgd_step(model.params, user, neg, 0.0, cfg);
      ++r.steps;
    }
  }
  r.loss = total / static_cast<double>(r.steps);
  model.age.count += 1;
  return r;
}

}  // namespace gossiprec::gmf
