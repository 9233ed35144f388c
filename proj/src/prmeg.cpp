#include "gossiprec/prmeg.hpp"

#include <algorithm>
#include <stdexcept>

#include "gossiprec/mathutil.hpp"

namespace gossiprec::prmeg {

ParamVector make_params(std::size_t num_locations, const Config& cfg, Rng& rng) {
  if (cfg.mix_weight < 0.0 || cfg.mix_weight > 1.0)
    throw std::invalid_argument("prmeg: mix weight must lie in [0, 1]");
  ParamVector p;
  p.add_segment(kSeqSegment, num_locations * cfg.dim);
  p.add_segment(kPrefSegment, num_locations * cfg.dim);
  p.add_segment(kMixSegment, 1);
  for (double& v : p.segment(kSeqSegment)) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
  for (double& v : p.segment(kPrefSegment)) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
  p.segment(kMixSegment)[0] = cfg.mix_weight;
  return p;
}

std::vector<double> make_user(const Config& cfg, Rng& rng) {
  std::vector<double> u(cfg.dim);
  for (double& v : u) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
  return u;
}

std::size_t num_locations(const ParamVector& shared, std::size_t dim) {
  return shared.segment(kSeqSegment).size() / dim;
}

double spatial_factor(double geo_dist_km, double tau_km) noexcept {
  return geo_dist_km <= tau_km ? 1.0 : geo_dist_km / tau_km;
}

namespace {

struct View {
  std::span<const double> seq, pref;
  double w;
  std::size_t dim, n;
};

View view_of(const ParamVector& shared, std::size_t user_dim) {
  View v;
  v.seq = shared.segment(kSeqSegment);
  v.pref = shared.segment(kPrefSegment);
  v.w = shared.segment(kMixSegment)[0];
  v.dim = user_dim;
  if (user_dim == 0 || v.seq.size() % user_dim != 0 || v.pref.size() != v.seq.size())
    throw std::invalid_argument("prmeg: user embedding dimension mismatch");
  v.n = v.seq.size() / user_dim;
  return v;
}

void check_id(const View& v, ItemId id) {
  if (id >= v.n) throw std::domain_error("prmeg: unknown location id " + std::to_string(id));
}

double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

std::span<const double> row(std::span<const double> table, std::size_t dim, ItemId id) {
  return table.subspan(static_cast<std::size_t>(id) * dim, dim);
}

double raw_distance(const View& v, std::span<const double> user, ItemId prev, ItemId cand) {
  return v.w * sqdist(row(v.seq, v.dim, prev), row(v.seq, v.dim, cand)) +
         (1.0 - v.w) * sqdist(user, row(v.pref, v.dim, cand));
}

double geo_distance(std::span<const GeoPoint> geo, ItemId a, ItemId b) {
  if (a >= geo.size() || b >= geo.size()) return 0.0;
  return haversine_km(geo[a], geo[b]);
}

}  // namespace

double score(const ParamVector& shared, std::span<const double> user, ItemId prev,
             ItemId cand, double geo_dist_km, double tau_km) {
  const View v = view_of(shared, user.size());
  check_id(v, prev);
  check_id(v, cand);
  if (!(geo_dist_km >= 0.0)) throw std::domain_error("prmeg: negative geographic distance");
  return spatial_factor(geo_dist_km, tau_km) * raw_distance(v, user, prev, cand);
}

PairGradient pair_gradient(const ParamVector& shared, std::span<const double> user,
                           ItemId prev, ItemId pos, ItemId neg, double dist_pos_km,
                           double dist_neg_km, double tau_km) {
  const View v = view_of(shared, user.size());
  check_id(v, prev);
  check_id(v, pos);
  check_id(v, neg);
  const double fp = spatial_factor(dist_pos_km, tau_km);
  const double fn = spatial_factor(dist_neg_km, tau_km);
  const double z = fn * raw_distance(v, user, prev, neg) - fp * raw_distance(v, user, prev, pos);
  const double g = sigmoid(-z);  // d log sigma(z) / dz

  const auto xs = row(v.seq, v.dim, prev), xp = row(v.seq, v.dim, pos),
             xn = row(v.seq, v.dim, neg);
  const auto pp = row(v.pref, v.dim, pos), pn = row(v.pref, v.dim, neg);
  PairGradient out;
  out.objective = log_sigmoid(z);
  const std::size_t d = v.dim;
  out.seq_prev.assign(d, 0.0);
  out.seq_pos.assign(d, 0.0);
  out.seq_neg.assign(d, 0.0);
  out.user.assign(d, 0.0);
  out.pref_pos.assign(d, 0.0);
  out.pref_neg.assign(d, 0.0);
  const double cs_n = g * fn * v.w * 2.0, cs_p = g * fp * v.w * 2.0;
  const double cp_n = g * fn * (1.0 - v.w) * 2.0, cp_p = g * fp * (1.0 - v.w) * 2.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double an = xs[k] - xn[k], ap = xs[k] - xp[k];
    out.seq_neg[k] = -cs_n * an;
    out.seq_pos[k] = cs_p * ap;
    const double bn = user[k] - pn[k], bp = user[k] - pp[k];
    out.pref_neg[k] = -cp_n * bn;
    out.pref_pos[k] = cp_p * bp;
    out.user[k] = cp_n * bn - cp_p * bp;
  }
  for (std::size_t k = 0; k < d; ++k)
    out.seq_prev[k] = cs_n * (xs[k] - xn[k]) - cs_p * (xs[k] - xp[k]);
  return out;
}

TransitionIndex::TransitionIndex(std::span<const Transition> observed)
    : sorted(observed.begin(), observed.end()) {
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
}

bool TransitionIndex::observed(ItemId prev, ItemId next) const noexcept {
  return std::binary_search(sorted.begin(), sorted.end(), Transition{prev, next});
}

std::size_t TransitionIndex::count_from(ItemId prev) const noexcept {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), Transition{prev, 0});
  auto hi = std::lower_bound(sorted.begin(), sorted.end(), Transition{prev + 1, 0});
  return static_cast<std::size_t>(hi - lo);
}

namespace {

bool draw_negative(const TransitionIndex& index, std::size_t n, Transition obs, Rng& rng,
                   ItemId& out) {
  auto valid = [&](ItemId c) { return c != obs.next && !index.observed(obs.prev, c); };
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto c = static_cast<ItemId>(rng.uniform_index(n));
    if (valid(c)) {
      out = c;
      return true;
    }
  }
  std::vector<ItemId> pool;
  for (ItemId c = 0; c < n; ++c)
    if (valid(c)) pool.push_back(c);
  if (pool.empty()) return false;
  out = pool[rng.uniform_index(pool.size())];
  return true;
}

void add_row(std::span<double> table, std::size_t dim, ItemId id, const std::vector<double>& g,
             double lr, double decay_coef, std::span<const double> old_row) {
  auto r = table.subspan(static_cast<std::size_t>(id) * dim, dim);
  for (std::size_t k = 0; k < dim; ++k) r[k] += lr * (g[k] - decay_coef * old_row[k]);
}

}  // namespace

bool update(ParamVector& shared, std::span<double> user, Transition obs,
            const TransitionIndex& index, std::span<const GeoPoint> geo, const Config& cfg,
            Rng& rng) {
  const std::size_t n = num_locations(shared, cfg.dim);
  if (obs.prev >= n || obs.next >= n)
    throw std::domain_error("prmeg: transition references unknown location");
  ItemId neg;
  if (!draw_negative(index, n, obs, rng, neg)) return false;
  if (cfg.lr == 0.0) return true;

  const auto g = pair_gradient(shared, user, obs.prev, obs.next, neg,
                               geo_distance(geo, obs.prev, obs.next),
                               geo_distance(geo, obs.prev, neg), cfg.tau_km);

  // Rows are updated from their pre-step values. When ids coincide the row
  // receives the sum of its gradient contributions.
  const std::size_t d = cfg.dim;
  const double decay = 2.0 * cfg.lambda;
  auto seq = shared.segment(kSeqSegment);
  auto pref = shared.segment(kPrefSegment);

  struct RowUpdate {
    ItemId id;
    const std::vector<double>* grad;
  };
  auto apply = [&](std::span<double> table, std::initializer_list<RowUpdate> ups) {
    // collect distinct ids with summed gradients
    std::vector<std::pair<ItemId, std::vector<double>>> acc;
    for (const auto& u : ups) {
      auto it = std::find_if(acc.begin(), acc.end(), [&](auto& a) { return a.first == u.id; });
      if (it == acc.end()) {
        acc.emplace_back(u.id, *u.grad);
      } else {
        for (std::size_t k = 0; k < d; ++k) it->second[k] += (*u.grad)[k];
      }
    }
    for (auto& [id, grad] : acc) {
      auto r = table.subspan(static_cast<std::size_t>(id) * d, d);
      std::vector<double> old(r.begin(), r.end());
      add_row(table, d, id, grad, cfg.lr, decay, old);
    }
  };
  apply(seq, {{obs.prev, &g.seq_prev}, {obs.next, &g.seq_pos}, {neg, &g.seq_neg}});
  apply(pref, {{obs.next, &g.pref_pos}, {neg, &g.pref_neg}});
  for (std::size_t k = 0; k < d; ++k) user[k] += cfg.lr * (g.user[k] - decay * user[k]);
  return true;
}

EpochResult train_epoch(GossipModel& model, std::span<double> user,
                        std::span<const Transition> transitions, const TransitionIndex& index,
                        std::span<const GeoPoint> geo, const Config& cfg, Rng& rng) {
  EpochResult r;
  if (transitions.empty()) {
    r.skipped = true;
    return r;
  }
  std::vector<Transition> order(transitions.begin(), transitions.end());
  rng.shuffle(order);
  for (const auto& t : order) {
    if (update(model.params, user, t, index, geo, cfg, rng)) {
      ++r.steps;
    } else {
      ++r.skipped_observations;
    }
  }
  model.age.count += 1;
  return r;
}

void score_candidates(const ParamVector& shared, std::span<const double> user, ItemId prev,
                      std::span<const ItemId> cands, std::span<const GeoPoint> geo,
                      double tau_km, std::span<double> out) {
  const View v = view_of(shared, user.size());
  check_id(v, prev);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    check_id(v, cands[i]);
    out[i] = -spatial_factor(geo_distance(geo, prev, cands[i]), tau_km) *
             raw_distance(v, user, prev, cands[i]);
  }
}

}  // namespace gossiprec::prmeg
