#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gossiprec/eval.hpp"
#include "gossiprec/ranking.hpp"
#include "support.hpp"

using namespace gossiprec;

namespace {

EvalSet one_list(ItemId target, std::size_t negatives) {
  EvalSet s;
  s.targets = {target};
  std::vector<ItemId> pool;
  for (std::size_t i = 0; i < negatives; ++i) pool.push_back(static_cast<ItemId>(1000 + i));
  s.pools = {pool};
  return s;
}

}  // namespace

TEST_CASE("hit ratio and ndcg examples") {
  const std::vector<ItemId> ranked = {4, 8, 15};
  CHECK(hr_at(ranked, 4) == 1);
  CHECK(hr_at(ranked, 16) == 0);
  CHECK(ndcg_at(0) == 1.0);
  CHECK(ndcg_at(2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ndcg_at(6) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ndcg_at(std::nullopt) == 0.0);
}

TEST_CASE("node hit ratio over a four-item test set with three hits") {
  EvalSet s;
  for (ItemId t = 0; t < 4; ++t) {
    s.targets.push_back(t);
    s.pools.push_back({100, 101, 102});
  }
  const std::vector<int> ks = {1};
  // target 3 scores below its pool, the others above
  const auto m = evaluate_lists(ModelFamily::gmf, s, ks, [](std::span<const ItemId> c, std::span<double> out) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] < 3 ? 10.0 : (c[i] == 3 ? -1.0 : 0.0);
  });
  CHECK(m.hr[0] == 0.75);
  CHECK(m.items == 4);
}

TEST_CASE("precision, recall, f1 examples") {
  const std::vector<ItemId> all = {1, 2, 3};
  auto r = precision_recall_f1_at(all, 3, all);
  REQUIRE(r);
  CHECK(r->precision == 1.0);
  CHECK(r->recall == 1.0);
  CHECK(r->f1 == 1.0);

  const std::vector<ItemId> other = {7, 8};
  r = precision_recall_f1_at(all, 3, other);
  CHECK(r->precision == 0.0);
  CHECK(r->recall == 0.0);
  CHECK(r->f1 == 0.0);

  const std::vector<ItemId> ten = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<ItemId> rel = {0, 4, 9, 20, 21};
  r = precision_recall_f1_at(ten, 10, rel);
  CHECK(r->precision == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r->recall == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r->f1 == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_FALSE(precision_recall_f1_at(ten, 10, {}));
}

TEST_CASE("oracle and adversarial scorers") {
  const auto s = one_list(7, 100);
  const std::vector<int> ks = {5, 10, 20};
  const auto best = evaluate_lists(ModelFamily::gmf, s, ks, [](auto c, auto out) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] == 7 ? 1.0 : 0.0;
  });
  const auto worst = evaluate_lists(ModelFamily::gmf, s, ks, [](auto c, auto out) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] == 7 ? -1.0 : 0.0;
  });
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(best.hr[j] == 1.0);
    CHECK(best.ndcg[j] == 1.0);
    CHECK(worst.hr[j] == 0.0);
    CHECK(worst.ndcg[j] == 0.0);
  }
}

TEST_CASE("gmf metrics match a brute-force reference on random lists") {
  Rng rng(71);
  const std::vector<int> ks = {5, 10, 20};
  for (int t = 0; t < 1000; ++t) {
    EvalSet s;
    const std::size_t n = 1 + rng.uniform_index(5);
    std::vector<std::vector<double>> all_scores;
    for (std::size_t j = 0; j < n; ++j) {
      s.targets.push_back(static_cast<ItemId>(j));
      std::vector<ItemId> pool;
      for (std::size_t i = 0; i < 100; ++i) pool.push_back(static_cast<ItemId>(100 + j * 100 + i));
      s.pools.push_back(pool);
    }
    std::vector<double> table(100 + n * 100);
    for (double& v : table) v = std::round(rng.uniform(0.0, 50.0));
    const auto m = evaluate_lists(ModelFamily::gmf, s, ks, [&](auto c, auto out) {
      for (std::size_t i = 0; i < c.size(); ++i) out[i] = table[c[i]];
    });
    for (std::size_t kj = 0; kj < ks.size(); ++kj) {
      int hits = 0;
      double ndcg = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        // rank = candidates strictly better, plus ties with a lower id
        std::size_t pos = 0;
        const double st = table[j];
        for (auto c : s.pools[j])
          if (table[c] > st || (table[c] == st && c < j)) ++pos;
        if (pos < static_cast<std::size_t>(ks[kj])) {
          ++hits;
          ndcg += std::log(2.0) / std::log(static_cast<double>(pos) + 2.0);
        }
      }
      CHECK(m.hr[kj] == static_cast<double>(hits) / static_cast<double>(n));
      CHECK(std::abs(m.ndcg[kj] - ndcg / static_cast<double>(n)) <= 1e-12);
    }
    CHECK(m.hr[0] <= m.hr[1]);
    CHECK(m.hr[1] <= m.hr[2]);
    for (std::size_t kj = 0; kj < ks.size(); ++kj) CHECK((m.hr[kj] > 0) == (m.ndcg[kj] > 0));
  }
}

TEST_CASE("prmeg metrics match a brute-force reference on random lists") {
  Rng rng(72);
  const std::vector<int> ks = {5, 10, 20};
  for (int t = 0; t < 1000; ++t) {
    EvalSet s;
    const std::size_t n = 1 + rng.uniform_index(6);
    std::set<ItemId> targets;
    while (targets.size() < n) targets.insert(static_cast<ItemId>(rng.uniform_index(30)));
    for (auto x : targets) {
      s.targets.push_back(x);
      std::vector<ItemId> pool;
      for (int i = 0; i < 20; ++i) pool.push_back(static_cast<ItemId>(30 + rng.uniform_index(60)));
      std::sort(pool.begin(), pool.end());
      pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
      s.pools.push_back(pool);
    }
    std::vector<double> table(90);
    for (double& v : table) v = rng.uniform(-1.0, 1.0);
    const auto m = evaluate_lists(ModelFamily::prmeg, s, ks, [&](auto c, auto out) {
      for (std::size_t i = 0; i < c.size(); ++i) out[i] = table[c[i]];
    });
    std::set<ItemId> cand(targets.begin(), targets.end());
    for (const auto& p : s.pools) cand.insert(p.begin(), p.end());
    std::vector<ItemId> order(cand.begin(), cand.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](ItemId a, ItemId b) { return table[a] > table[b]; });
    for (std::size_t kj = 0; kj < ks.size(); ++kj) {
      const auto r = static_cast<std::size_t>(ks[kj]);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < std::min(r, order.size()); ++i) hits += targets.count(order[i]);
      const double p = static_cast<double>(hits) / static_cast<double>(r);
      const double rec = static_cast<double>(hits) / static_cast<double>(n);
      const double f1 = p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0;
      CHECK(m.precision[kj] == p);
      CHECK(m.recall[kj] == rec);
      CHECK(std::abs(m.f1[kj] - f1) <= 1e-12);
    }
    CHECK(m.recall[0] <= m.recall[1]);
    CHECK(m.recall[1] <= m.recall[2]);
  }
}

TEST_CASE("metrics depend only on the ordering of scores") {
  Rng rng(73);
  EvalSet s;
  for (ItemId j = 0; j < 5; ++j) {
    s.targets.push_back(j);
    std::vector<ItemId> pool;
    for (ItemId i = 0; i < 100; ++i) pool.push_back(10 + j * 100 + i);
    s.pools.push_back(pool);
  }
  std::vector<double> table(600);
  for (double& v : table) v = rng.uniform(-3.0, 3.0);
  const std::vector<int> ks = {5, 10, 20};
  const auto a = evaluate_lists(ModelFamily::gmf, s, ks, [&](auto c, auto out) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = table[c[i]];
  });
  const auto b = evaluate_lists(ModelFamily::gmf, s, ks, [&](auto c, auto out) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = std::exp(2.0 * table[c[i]]) + 5.0;
  });
  CHECK(a.hr == b.hr);
  CHECK(a.ndcg == b.ndcg);
}

TEST_CASE("random scorer calibration") {
  Rng rng(74);
  const std::vector<int> ks = {20};
  double total = 0.0;
  const int trials = 10000;
  const auto s = one_list(5000, 100);
  for (int t = 0; t < trials; ++t) {
    const auto m = evaluate_lists(ModelFamily::gmf, s, ks, [&](auto, auto out) {
      for (double& v : out) v = rng.uniform01();
    });
    total += m.hr[0];
  }
  CHECK(std::abs(total / trials - 20.0 / 101.0) <= 0.01);
}

TEST_CASE("empty evaluation sets are undefined") {
  const std::vector<int> ks = {5};
  const auto m = evaluate_lists(ModelFamily::gmf, EvalSet{}, ks, [](auto, auto) {});
  CHECK_FALSE(m.defined);
  CHECK(metric_values(ModelFamily::gmf, m) == std::vector<double>{0.0, 0.0});
  CHECK(metric_columns(ModelFamily::gmf, ks) == std::vector<std::string>{"hr@5", "ndcg@5"});
  CHECK(metric_columns(ModelFamily::prmeg, ks) ==
        std::vector<std::string>{"precision@5", "recall@5", "f1@5"});
}

TEST_CASE("percentiles and cdf") {
  const std::vector<double> four = {0, 1, 2, 3};
  CHECK(nearest_rank(four, 99.9) == 3);
  CHECK(nearest_rank(four, 50) == 1);
  CHECK(nearest_rank(four, 1) == 0);
  CHECK(nearest_rank(four, 100) == 3);

  const std::vector<double> constant(5, 0.4);
  const auto c = cdf_and_percentiles(constant);
  REQUIRE(c.cdf.size() == 1);
  CHECK(c.cdf[0] == std::make_pair(0.4, 1.0));

  Rng rng(75);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + rng.uniform_index(50));
    for (double& x : v) x = std::round(rng.uniform(0.0, 10.0)) / 10.0;
    const auto d = cdf_and_percentiles(v);
    for (const auto& [x, y] : d.cdf) {
      const auto le = std::count_if(v.begin(), v.end(), [&](double z) { return z <= x; });
      CHECK(y == static_cast<double>(le) / static_cast<double>(v.size()));
    }
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [p, q] : d.percentiles) {
      // smallest value whose cumulative count reaches p percent
      double want = sorted.back();
      for (std::size_t i = 0; i < sorted.size(); ++i)
        if (100.0 * static_cast<double>(i + 1) >= p * static_cast<double>(sorted.size())) {
          want = sorted[i];
          break;
        }
      CHECK(q == want);
    }
  }
}
