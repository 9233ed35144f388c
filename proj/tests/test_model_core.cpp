#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gossiprec/gmf.hpp"
#include "gossiprec/mathutil.hpp"
#include "gossiprec/prmeg.hpp"
#include "gossiprec/ranking.hpp"
#include "support.hpp"

using namespace gossiprec;

namespace {

// relative error with a floor so that near-zero components compare absolutely
bool grad_close(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
  return std::abs(analytic - numeric) / scale <= 1e-4;
}

ParamVector tiny_gmf(std::size_t items, std::size_t dim) {
  gmf::Config cfg;
  cfg.dim = dim;
  Rng rng(1);
  return gmf::make_params(items, cfg, rng);
}

double scalar_gmf_logit(const ParamVector& p, std::span<const double> user, ItemId item) {
  const auto q = p.segment("item_embeddings");
  const auto h = p.segment("output_weights");
  const std::size_t d = user.size();
  double s = p.segment("output_bias")[0];
  for (std::size_t k = 0; k < d; ++k) s += h[k] * user[k] * q[item * d + k];
  return s;
}

double scalar_prmeg(const ParamVector& p, std::span<const double> u, ItemId prev, ItemId cand,
                    double dist, double tau) {
  const auto seq = p.segment("seq_embeddings");
  const auto pref = p.segment("pref_loc_embeddings");
  const double w = p.segment("weight_w")[0];
  const std::size_t d = u.size();
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    a += (seq[prev * d + k] - seq[cand * d + k]) * (seq[prev * d + k] - seq[cand * d + k]);
    b += (u[k] - pref[cand * d + k]) * (u[k] - pref[cand * d + k]);
  }
  const double f = dist <= tau ? 1.0 : dist / tau;
  return f * (w * a + (1.0 - w) * b);
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(derive_seed(7, 3, 1)), b(derive_seed(7, 3, 1)), c(derive_seed(7, 3, 2));
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.uniform_index(7) < 7);
    CHECK(r.exponential(0.05) >= 0.0);
  }
  const auto idx = r.sample_indices(50, 20);
  CHECK(idx.size() == 20);
  CHECK(std::set<std::uint64_t>(idx.begin(), idx.end()).size() == 20);
  for (auto i : idx) CHECK(i < 50);
}

TEST_CASE("param vector segments tile the array") {
  ParamVector p;
  p.add_segment("a", 3);
  p.add_segment("b", 2);
  CHECK(p.size() == 5);
  CHECK(p.layout_valid());
  CHECK(p.segment("b").size() == 2);
  p.segment("b")[1] = 4.0;
  CHECK(p.values()[4] == 4.0);
  CHECK(p.has_segment("a"));
  CHECK_FALSE(p.has_segment("c"));
  CHECK_THROWS(p.segment("c"));
  CHECK_THROWS(p.add_segment("a", 1));
  p.values()[0] = std::nan("");
  CHECK_FALSE(p.all_finite());
}

TEST_CASE("serialization round-trips random models") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    GossipModel m;
    m.params = testing::random_params(rng, rng.uniform_index(50), 1 + rng.uniform_index(10), 1e3);
    m.age.count = rng.next_u64();
    m.sample_count = rng.next_u64();
    m.owner = static_cast<NodeId>(rng.next_u64());
    const auto bytes = serialize(m);
    CHECK(bytes.size() == serialized_size(m));
    CHECK(deserialize(bytes) == m);
  }
}

TEST_CASE("deserialize rejects malformed payloads") {
  Rng rng(2);
  GossipModel m;
  m.params = testing::random_params(rng, 4, 3);
  auto bytes = serialize(m);
  SUBCASE("truncated") {
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(deserialize(bytes), ProtocolError);
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize(bytes), ProtocolError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back(0);
    CHECK_THROWS_AS(deserialize(bytes), ProtocolError);
  }
}

TEST_CASE("checkpoint files round-trip") {
  testing::TempDir dir("ckpt");
  Rng rng(3);
  GossipModel m;
  m.params = testing::random_params(rng, 10, 2);
  m.age.count = 17;
  const auto path = (dir.path / "m.bin").string();
  save_checkpoint(m, path);
  CHECK(load_checkpoint(path) == m);
}

TEST_CASE("gmf forward: fixed cases") {
  auto p = tiny_gmf(1, 2);
  std::fill(p.values().begin(), p.values().end(), 0.0);
  const std::vector<double> zero = {0.0, 0.0};
  CHECK(gmf::forward(p, zero, 0) == doctest::Approx(0.5).epsilon(1e-15));

  p.segment("item_embeddings")[0] = 1.0;
  p.segment("output_weights")[0] = 1.0;
  p.segment("output_weights")[1] = 1.0;
  const std::vector<double> user = {1.0, 0.0};
  CHECK(gmf::forward(p, user, 0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK_THROWS_AS(gmf::forward(p, user, 1), std::domain_error);
}

TEST_CASE("gmf forward and batch score match a scalar oracle") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 1 + rng.uniform_index(24), items = 1 + rng.uniform_index(30);
    auto p = tiny_gmf(items, dim);
    for (double& v : p.values()) v = rng.uniform(-2.0, 2.0);
    std::vector<double> user(dim);
    for (double& v : user) v = rng.uniform(-2.0, 2.0);
    std::vector<ItemId> cands(items);
    std::iota(cands.begin(), cands.end(), 0);
    std::vector<double> scores(items);
    gmf::score(p, user, cands, scores);
    for (ItemId i = 0; i < items; ++i) {
      const double s = scalar_gmf_logit(p, user, i);
      CHECK(std::abs(gmf::logit(p, user, i) - s) <= 1e-12 * std::max(1.0, std::abs(s)));
      CHECK(std::abs(scores[i] - s) <= 1e-12 * std::max(1.0, std::abs(s)));
      const double f = gmf::forward(p, user, i);
      CHECK(std::abs(f - sigmoid(s)) <= 1e-12);
      CHECK((f > 0.0 && f < 1.0));
    }
  }
}

TEST_CASE("gmf analytic gradient matches central differences") {
  Rng rng(31);
  const double eps = 1e-6;
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 2 + rng.uniform_index(15), items = 2 + rng.uniform_index(20);
    auto p = tiny_gmf(items, dim);
    for (double& v : p.values()) v = rng.uniform(-1.0, 1.0);
    std::vector<double> user(dim);
    for (double& v : user) v = rng.uniform(-1.0, 1.0);
    const auto item = static_cast<ItemId>(rng.uniform_index(items));
    const double label = rng.uniform_index(2) ? 1.0 : 0.0;
    const auto g = gmf::example_gradient(p, user, item, label);
    CHECK(g.loss == doctest::Approx(gmf::example_loss(p, user, item, label)).epsilon(1e-15));

    auto fd_param = [&](double& slot) {
      const double keep = slot;
      slot = keep + eps;
      const double up = gmf::example_loss(p, user, item, label);
      slot = keep - eps;
      const double down = gmf::example_loss(p, user, item, label);
      slot = keep;
      return (up - down) / (2 * eps);
    };
    for (std::size_t k = 0; k < dim; ++k) {
      CHECK(grad_close(g.user[k], fd_param(user[k])));
      CHECK(grad_close(g.item[k], fd_param(p.segment("item_embeddings")[item * dim + k])));
      CHECK(grad_close(g.weights[k], fd_param(p.segment("output_weights")[k])));
    }
    CHECK(grad_close(g.bias, fd_param(p.segment("output_bias")[0])));
  }
}

TEST_CASE("gmf training step applies the negative gradient") {
  // one item, already seen: the epoch is exactly one positive step
  gmf::Config cfg;
  cfg.dim = 4;
  cfg.lr = 0.3;
  Rng rng(4);
  GossipModel m;
  m.params = gmf::make_params(1, cfg, rng);
  for (double& v : m.params.values()) v = rng.uniform(-1.0, 1.0);
  std::vector<double> user = {0.3, -0.2, 0.5, 0.1};
  const auto g = gmf::example_gradient(m.params, user, 0, 1.0);
  const auto before = m.params;
  const auto user_before = user;
  const std::vector<ItemId> pos = {0};
  const auto r = gmf::train_epoch(m, user, pos, pos, cfg, rng);
  CHECK(r.steps == 1);
  CHECK(m.age.count == 1);
  // l2 pulls both embeddings towards zero; h and b are not regularized
  const double decay = 2.0 * cfg.l2;
  for (std::size_t k = 0; k < 4; ++k) {
    const double q = before.segment("item_embeddings")[k];
    CHECK(user[k] ==
          doctest::Approx(user_before[k] - cfg.lr * (g.user[k] + decay * user_before[k])).epsilon(1e-14));
    CHECK(m.params.segment("item_embeddings")[k] ==
          doctest::Approx(q - cfg.lr * (g.item[k] + decay * q)).epsilon(1e-14));
    CHECK(m.params.segment("output_weights")[k] ==
          doctest::Approx(before.segment("output_weights")[k] - cfg.lr * g.weights[k]).epsilon(1e-14));
  }
  CHECK(m.params.segment("output_bias")[0] ==
        doctest::Approx(before.segment("output_bias")[0] - cfg.lr * g.bias).epsilon(1e-14));
}

TEST_CASE("gmf epoch: zero learning rate, determinism, empty input") {
  gmf::Config cfg;
  cfg.dim = 8;
  Rng init(5);
  GossipModel m;
  m.params = gmf::make_params(40, cfg, init);
  auto user = gmf::make_user(cfg, init);
  const std::vector<ItemId> pos = {1, 5, 9};
  const std::vector<ItemId> seen = {1, 5, 9};

  SUBCASE("lr = 0 leaves parameters unchanged") {
    cfg.lr = 0.0;
    const auto before = m.params;
    const auto ub = user;
    Rng rng(6);
    const auto r = gmf::train_epoch(m, user, pos, seen, cfg, rng);
    CHECK(m.params.values().size() == before.values().size());
    CHECK(std::equal(m.params.values().begin(), m.params.values().end(), before.values().begin()));
    CHECK(user == ub);
    CHECK(r.loss > 0.0);
    CHECK(r.steps == pos.size() * (1 + cfg.neg_ratio));
  }
  SUBCASE("same seed gives bit-identical parameters") {
    auto m2 = m;
    auto u2 = user;
    Rng a(9), b(9);
    gmf::train_epoch(m, user, pos, seen, cfg, a);
    gmf::train_epoch(m2, u2, pos, seen, cfg, b);
    CHECK(m == m2);
    CHECK(user == u2);
  }
  SUBCASE("empty training set is a flagged no-op") {
    const auto before = m;
    Rng rng(1);
    const auto r = gmf::train_epoch(m, user, {}, seen, cfg, rng);
    CHECK(r.skipped);
    CHECK(m == before);
  }
}

TEST_CASE("prmeg score: fixed cases") {
  prmeg::Config cfg;
  cfg.dim = 3;
  Rng rng(1);
  auto p = prmeg::make_params(4, cfg, rng);
  auto user = prmeg::make_user(cfg, rng);
  auto seq = p.segment("seq_embeddings");
  auto pref = p.segment("pref_loc_embeddings");
  for (std::size_t k = 0; k < 3; ++k) {
    seq[2 * 3 + k] = seq[0 * 3 + k];
    pref[2 * 3 + k] = user[k];
  }
  CHECK(prmeg::score(p, user, 0, 2, 0.5, 1.0) == 0.0);

  SUBCASE("w = 1 ignores the preference space") {
    p.segment("weight_w")[0] = 1.0;
    const double before = prmeg::score(p, user, 0, 1, 0.2, 1.0);
    for (std::size_t k = 0; k < 3; ++k) pref[1 * 3 + k] += 5.0;
    CHECK(prmeg::score(p, user, 0, 1, 0.2, 1.0) == before);
  }
  SUBCASE("spatial factor") {
    CHECK(prmeg::spatial_factor(0.5, 1.0) == 1.0);
    CHECK(prmeg::spatial_factor(1.0, 1.0) == 1.0);
    CHECK(prmeg::spatial_factor(3.0, 1.0) == 3.0);
  }
  CHECK_THROWS_AS(prmeg::score(p, user, 0, 9, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(prmeg::score(p, user, 0, 1, -1.0, 1.0), std::domain_error);
}

TEST_CASE("prmeg score matches a scalar oracle and is non-negative") {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    prmeg::Config cfg;
    cfg.dim = 1 + rng.uniform_index(32);
    cfg.mix_weight = rng.uniform01();
    const std::size_t locs = 2 + rng.uniform_index(20);
    auto p = prmeg::make_params(locs, cfg, rng);
    for (double& v : p.segment("seq_embeddings")) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.segment("pref_loc_embeddings")) v = rng.uniform(-1.0, 1.0);
    std::vector<double> user(cfg.dim);
    for (double& v : user) v = rng.uniform(-1.0, 1.0);
    const auto a = static_cast<ItemId>(rng.uniform_index(locs));
    const auto b = static_cast<ItemId>(rng.uniform_index(locs));
    const double dist = rng.uniform(0.0, 5.0), tau = rng.uniform(0.5, 2.0);
    const double expect = scalar_prmeg(p, user, a, b, dist, tau);
    const double got = prmeg::score(p, user, a, b, dist, tau);
    CHECK(std::abs(got - expect) <= 1e-12 * std::max(1.0, expect));
    CHECK(got >= 0.0);
  }
}

TEST_CASE("prmeg analytic gradient matches central differences") {
  Rng rng(51);
  const double eps = 1e-6;
  for (int t = 0; t < 100; ++t) {
    prmeg::Config cfg;
    cfg.dim = 2 + rng.uniform_index(15);
    cfg.mix_weight = rng.uniform01();
    const std::size_t d = cfg.dim;
    // a small vocabulary makes coincident rows (prev == pos, ...) likely
    const std::size_t locs = 3 + rng.uniform_index(4);
    auto p = prmeg::make_params(locs, cfg, rng);
    for (double& v : p.segment("seq_embeddings")) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.segment("pref_loc_embeddings")) v = rng.uniform(-1.0, 1.0);
    std::vector<double> user(d);
    for (double& v : user) v = rng.uniform(-1.0, 1.0);
    const auto prev = static_cast<ItemId>(rng.uniform_index(locs));
    const auto pos = static_cast<ItemId>(rng.uniform_index(locs));
    auto neg = static_cast<ItemId>(rng.uniform_index(locs));
    if (neg == pos) neg = static_cast<ItemId>((pos + 1) % locs);
    const double dp = rng.uniform(0.0, 3.0), dn = rng.uniform(0.0, 3.0), tau = 1.0;
    const auto g = prmeg::pair_gradient(p, user, prev, pos, neg, dp, dn, tau);

    auto objective = [&] {
      const double z = prmeg::score(p, user, prev, neg, dn, tau) -
                       prmeg::score(p, user, prev, pos, dp, tau);
      return log_sigmoid(z);
    };
    CHECK(g.objective == doctest::Approx(objective()).epsilon(1e-12));
    auto fd = [&](double& slot) {
      const double keep = slot;
      slot = keep + eps;
      const double up = objective();
      slot = keep - eps;
      const double down = objective();
      slot = keep;
      return (up - down) / (2 * eps);
    };
    auto seq = p.segment("seq_embeddings");
    auto pref = p.segment("pref_loc_embeddings");
    for (std::size_t k = 0; k < d; ++k) {
      // gradients of roles that share a row add up
      for (ItemId row = 0; row < locs; ++row) {
        double expect = 0.0;
        if (row == prev) expect += g.seq_prev[k];
        if (row == pos) expect += g.seq_pos[k];
        if (row == neg) expect += g.seq_neg[k];
        CHECK(grad_close(expect, fd(seq[row * d + k])));
        double expect_pref = 0.0;
        if (row == pos) expect_pref += g.pref_pos[k];
        if (row == neg) expect_pref += g.pref_neg[k];
        CHECK(grad_close(expect_pref, fd(pref[row * d + k])));
      }
      CHECK(grad_close(g.user[k], fd(user[k])));
    }
  }
}

TEST_CASE("prmeg update: zero step, determinism, exhausted negatives") {
  prmeg::Config cfg;
  cfg.dim = 6;
  Rng init(8);
  auto p = prmeg::make_params(10, cfg, init);
  auto user = prmeg::make_user(cfg, init);
  std::vector<GeoPoint> geo(10);
  for (std::size_t i = 0; i < 10; ++i) geo[i] = {40.7 + 0.01 * static_cast<double>(i), -74.0};
  const std::vector<prmeg::Transition> obs = {{0, 1}, {1, 2}, {2, 3}};
  const prmeg::TransitionIndex index(obs);

  SUBCASE("gamma = 0") {
    cfg.lr = 0.0;
    const auto before = p;
    const auto ub = user;
    Rng rng(1);
    CHECK(prmeg::update(p, user, obs[0], index, geo, cfg, rng));
    CHECK(p == before);
    CHECK(user == ub);
  }
  SUBCASE("same seed, same result") {
    auto p2 = p;
    auto u2 = user;
    Rng a(3), b(3);
    GossipModel m1{p, {}, 0, 0}, m2{p2, {}, 0, 0};
    prmeg::train_epoch(m1, user, obs, index, geo, cfg, a);
    prmeg::train_epoch(m2, u2, obs, index, geo, cfg, b);
    CHECK(m1 == m2);
    CHECK(user == u2);
    CHECK(m1.age.count == 1);
  }
  SUBCASE("no unobserved negative: skipped") {
    std::vector<prmeg::Transition> all;
    for (ItemId j = 0; j < 10; ++j) all.push_back({0, j});
    const prmeg::TransitionIndex full(all);
    const auto before = p;
    Rng rng(2);
    CHECK_FALSE(prmeg::update(p, user, {0, 1}, full, geo, cfg, rng));
    CHECK(p == before);
  }
}

TEST_CASE("ranking: ties, single candidate, NaN") {
  const std::vector<ItemId> one = {7};
  const std::vector<double> s1 = {0.3};
  CHECK(top_k(one, s1, 1) == std::vector<ItemId>{7});

  const std::vector<ItemId> c = {9, 4, 6};
  const std::vector<double> s = {1.0, 1.0, 0.5};
  CHECK(top_k(c, s, 3) == std::vector<ItemId>{4, 9, 6});
  CHECK(rank_position(0, c, s) == 1);
  CHECK(rank_position(1, c, s) == 0);

  const std::vector<double> with_nan = {std::nan(""), 0.0, -5.0};
  CHECK(top_k(c, with_nan, 3) == std::vector<ItemId>{4, 6, 9});
  CHECK_THROWS(top_k(c, s, 4));
}

TEST_CASE("ranking matches a full-sort oracle on 101 candidates") {
  Rng rng(61);
  for (int t = 0; t < 1000; ++t) {
    std::vector<ItemId> cands(101);
    for (auto& x : cands) x = static_cast<ItemId>(rng.uniform_index(100000));
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    rng.shuffle(cands);
    std::vector<double> scores(cands.size());
    // coarse scores so ties occur
    for (auto& v : scores) v = std::round(rng.uniform(0.0, 20.0));
    std::vector<std::pair<double, ItemId>> full;
    for (std::size_t i = 0; i < cands.size(); ++i) full.emplace_back(-scores[i], cands[i]);
    std::sort(full.begin(), full.end());
    const std::size_t k = 1 + rng.uniform_index(cands.size());
    const auto got = top_k(cands, scores, k);
    for (std::size_t i = 0; i < k; ++i) CHECK(got[i] == full[i].second);
    const std::size_t probe = rng.uniform_index(cands.size());
    const auto pos = static_cast<std::size_t>(
        std::find(full.begin(), full.end(), std::make_pair(-scores[probe], cands[probe])) -
        full.begin());
    CHECK(rank_position(probe, cands, scores) == pos);
  }
}
