#include "gossiprec/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace gossiprec {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

/// Dense re-indexing of raw string ids by first appearance.
class Vocab {
 public:
  std::uint32_t id(std::string_view raw) {
    auto [it, inserted] = index_.try_emplace(std::string(raw), static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.emplace_back(raw);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(names_); }
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace

InteractionDataset load_movielens(const std::string& path) {
  auto in = open_input(path);
  InteractionDataset ds;
  Vocab users, items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto f = split_tabs(text);
    if (f.size() != 4) throw DataError("expected 4 tab-separated fields", lineno);
    Interaction r;
    double rating;
    std::int64_t ts;
    if (f[0].empty() || f[1].empty() || !parse_number(f[2], rating) || !parse_number(f[3], ts))
      throw DataError("malformed rating record", lineno);
    r.user = users.id(f[0]);
    r.item = items.id(f[1]);
    r.value = rating;
    r.timestamp = ts;
    ds.records.push_back(r);
  }
  ds.user_ids = users.take();
  ds.item_ids = items.take();
  ds.item_geo.assign(ds.item_ids.size(), GeoPoint{});
  return ds;
}

namespace {

// days since 1970-01-01 for a proleptic Gregorian date
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool take_int(std::string_view& s, std::size_t width, int& out) {
  if (s.size() < width) return false;
  out = 0;
  for (std::size_t i = 0; i < width; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  s.remove_prefix(width);
  return true;
}

bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  int y, mo, d, h, mi, sec;
  if (!take_int(s, 4, y) || !take_char(s, '-') || !take_int(s, 2, mo) || !take_char(s, '-') ||
      !take_int(s, 2, d))
    return std::nullopt;
  if (!(take_char(s, 'T') || take_char(s, ' '))) return std::nullopt;
  if (!take_int(s, 2, h) || !take_char(s, ':') || !take_int(s, 2, mi) || !take_char(s, ':') ||
      !take_int(s, 2, sec))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (d > kDays[mo - 1] + (mo == 2 && leap ? 1 : 0)) return std::nullopt;
  if (take_char(s, '.')) {
    while (!s.empty() && s.front() >= '0' && s.front() <= '9') s.remove_prefix(1);
  }
  std::int64_t offset = 0;
  if (take_char(s, 'Z')) {
  } else if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    const int sign = s.front() == '+' ? 1 : -1;
    s.remove_prefix(1);
    int oh, om;
    if (!take_int(s, 2, oh)) return std::nullopt;
    take_char(s, ':');
    if (!take_int(s, 2, om)) return std::nullopt;
    offset = sign * (oh * 3600 + om * 60);
  }
  if (!s.empty()) return std::nullopt;
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + sec - offset;
}

InteractionDataset load_checkins(const std::string& path) {
  auto in = open_input(path);
  InteractionDataset ds;
  Vocab users, items, cats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto f = split_tabs(text);
    if (f.size() != 6) throw DataError("expected 6 tab-separated fields", lineno);
    Interaction r;
    const auto ts = parse_iso8601(f[2]);
    if (f[0].empty() || f[1].empty() || !ts || !parse_number(f[3], r.geo.lat) ||
        !parse_number(f[4], r.geo.lon))
      throw DataError("malformed check-in record", lineno);
    if (std::abs(r.geo.lat) > 90.0 || std::abs(r.geo.lon) > 180.0)
      throw DataError("coordinates out of range", lineno);
    r.user = users.id(f[0]);
    r.item = items.id(f[1]);
    r.timestamp = *ts;
    r.value = 1.0;
    r.category = f[5].empty() ? kNoCategory : cats.id(f[5]);
    if (r.item >= ds.item_geo.size()) ds.item_geo.push_back(r.geo);
    ds.records.push_back(r);
  }
  ds.user_ids = users.take();
  ds.item_ids = items.take();
  ds.categories = cats.take();
  return ds;
}

namespace {

/// Rebuilds a dataset from a record subset, re-indexing by first appearance.
InteractionDataset reindex(const InteractionDataset& src, const std::vector<Interaction>& kept) {
  InteractionDataset out;
  out.categories = src.categories;
  std::vector<std::uint32_t> umap(src.num_users(), ~0u), imap(src.num_items(), ~0u);
  out.records.reserve(kept.size());
  for (auto r : kept) {
    if (umap[r.user] == ~0u) {
      umap[r.user] = static_cast<std::uint32_t>(out.user_ids.size());
      out.user_ids.push_back(src.user_ids[r.user]);
    }
    if (imap[r.item] == ~0u) {
      imap[r.item] = static_cast<std::uint32_t>(out.item_ids.size());
      out.item_ids.push_back(src.item_ids[r.item]);
      out.item_geo.push_back(r.item < src.item_geo.size() ? src.item_geo[r.item] : GeoPoint{});
    }
    r.user = umap[r.user];
    r.item = imap[r.item];
    out.records.push_back(r);
  }
  return out;
}

}  // namespace

InteractionDataset filter_min_counts(const InteractionDataset& ds, std::size_t min_item_users,
                                     std::size_t min_user_items) {
  std::vector<Interaction> kept = ds.records;
  while (true) {
    std::vector<std::size_t> user_records(ds.num_users(), 0);
    std::vector<std::pair<ItemId, UserId>> pairs;
    pairs.reserve(kept.size());
    for (const auto& r : kept) {
      ++user_records[r.user];
      pairs.emplace_back(r.item, r.user);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    std::vector<std::size_t> item_users(ds.num_items(), 0);
    for (const auto& p : pairs) ++item_users[p.first];

    std::vector<Interaction> next;
    next.reserve(kept.size());
    for (const auto& r : kept)
      if (item_users[r.item] >= min_item_users && user_records[r.user] >= min_user_items)
        next.push_back(r);
    if (next.size() == kept.size()) break;
    kept = std::move(next);
  }
  return reindex(ds, kept);
}

InteractionDataset binarize(const InteractionDataset& ds) {
  InteractionDataset out = ds;
  for (auto& r : out.records) r.value = 1.0;
  return out;
}

InteractionDataset restrict_users(const InteractionDataset& ds, const std::vector<UserId>& users) {
  std::vector<char> keep(ds.num_users(), 0);
  for (UserId u : users) {
    if (u >= ds.num_users()) throw std::out_of_range("restrict_users: unknown user");
    keep[u] = 1;
  }
  std::vector<Interaction> kept;
  for (const auto& r : ds.records)
    if (keep[r.user]) kept.push_back(r);
  return reindex(ds, kept);
}

double sparsity(const InteractionDataset& ds) {
  if (ds.num_users() == 0 || ds.num_items() == 0) return 1.0;
  std::vector<std::pair<UserId, ItemId>> pairs;
  pairs.reserve(ds.records.size());
  for (const auto& r : ds.records) pairs.emplace_back(r.user, r.item);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  const double mean_items = static_cast<double>(pairs.size()) / static_cast<double>(ds.num_users());
  return 1.0 - mean_items / static_cast<double>(ds.num_items());
}

std::size_t test_size_for(std::size_t n, double ratio) {
  // the epsilon keeps exact halves (e.g. 0.15 * 10) from rounding down
  const double x = ratio * static_cast<double>(n);
  const auto t = static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
  return std::max<std::size_t>(1, t);
}

namespace {

std::vector<ItemId> draw_pool(std::size_t num_items, const std::vector<ItemId>& interacted,
                              std::size_t count, Rng& rng) {
  const std::size_t available = num_items - interacted.size();
  if (available < count)
    throw DataError("user has fewer than " + std::to_string(count) + " unseen items");
  std::vector<ItemId> pool;
  pool.reserve(count);
  // index into the complement of `interacted` so each unseen item is equally likely
  for (auto idx : rng.sample_indices(available, count)) {
    // the k-th unseen item: smallest x with x - |{interacted <= x}| == idx
    std::uint64_t lo = idx, hi = idx + interacted.size();
    while (lo < hi) {
      const std::uint64_t mid = (lo + hi) / 2;
      const auto below = static_cast<std::uint64_t>(
          std::upper_bound(interacted.begin(), interacted.end(), static_cast<ItemId>(mid)) -
          interacted.begin());
      if (static_cast<std::int64_t>(mid) - static_cast<std::int64_t>(below) <
          static_cast<std::int64_t>(idx)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    pool.push_back(static_cast<ItemId>(lo));
  }
  return pool;
}

}  // namespace

std::optional<NodeSplit> split_user(const InteractionDataset& ds, UserId user,
                                    const SplitOptions& opts, Rng& rng) {
  std::vector<Interaction> recs;
  for (const auto& r : ds.records)
    if (r.user == user) recs.push_back(r);
  std::stable_sort(recs.begin(), recs.end(),
                   [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
  if (opts.distinct_items) {
    std::vector<char> seen(ds.num_items(), 0);
    std::vector<Interaction> uniq;
    for (const auto& r : recs)
      if (!seen[r.item]) {
        seen[r.item] = 1;
        uniq.push_back(r);
      }
    recs = std::move(uniq);
  }
  const std::size_t n = recs.size();
  if (n < 3) return std::nullopt;

  NodeSplit s;
  s.user = user;
  for (const auto& r : recs) s.interacted.push_back(r.item);
  std::sort(s.interacted.begin(), s.interacted.end());
  s.interacted.erase(std::unique(s.interacted.begin(), s.interacted.end()), s.interacted.end());

  const std::size_t n_test = test_size_for(n, opts.test_ratio);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (!opts.chronological) rng.shuffle(order);
  // chronological: the last n_test records; random: the first n_test shuffled
  std::vector<char> role(n, 0);  // 0 train, 1 weighting, 2 test
  std::vector<std::size_t> rest;
  if (opts.chronological) {
    for (std::size_t i = n - n_test; i < n; ++i) role[i] = 2;
    for (std::size_t i = 0; i < n - n_test; ++i) rest.push_back(i);
  } else {
    for (std::size_t i = 0; i < n_test; ++i) role[order[i]] = 2;
    for (std::size_t i = n_test; i < n; ++i) rest.push_back(order[i]);
    std::sort(rest.begin(), rest.end());
  }
  for (auto j : rng.sample_indices(rest.size(), n_test)) role[rest[j]] = 1;

  if (opts.chronological) {
    for (std::size_t i = 0; i < n; ++i) {
      if (role[i] == 0) s.train.push_back(recs[i]);
      if (role[i] == 1) s.weighting.push_back(recs[i]);
      if (role[i] == 2) s.test.push_back(recs[i]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = recs[order[i]];
      if (role[order[i]] == 2) s.test.push_back(r);
    }
    for (std::size_t i : rest) {
      if (role[i] == 1) s.weighting.push_back(recs[i]);
      if (role[i] == 0) s.train.push_back(recs[i]);
    }
  }
  for (std::size_t i = 0; i < s.test.size(); ++i)
    s.test_negatives.push_back(draw_pool(ds.num_items(), s.interacted, opts.num_negatives, rng));
  for (std::size_t i = 0; i < s.weighting.size(); ++i)
    s.weighting_negatives.push_back(
        draw_pool(ds.num_items(), s.interacted, opts.num_negatives, rng));
  return s;
}

SplitResult split_all(const InteractionDataset& ds, const SplitOptions& opts,
                      std::uint64_t seed) {
  // bucket records by user once instead of scanning per user
  std::vector<std::vector<Interaction>> by_user(ds.num_users());
  for (const auto& r : ds.records) by_user[r.user].push_back(r);
  SplitResult out;
  InteractionDataset single;
  single.item_ids = ds.item_ids;
  single.user_ids = ds.user_ids;
  for (UserId u = 0; u < ds.num_users(); ++u) {
    single.records = std::move(by_user[u]);
    Rng rng(derive_seed(seed, u, 0x5b1));
    auto s = split_user(single, u, opts, rng);
    if (s) {
      out.nodes.push_back(std::move(*s));
    } else {
      ++out.excluded_users;
    }
  }
  return out;
}

KMeansResult kmeans(const std::vector<double>& points, std::size_t n, std::size_t dim,
                    std::size_t k, Rng& rng, std::size_t max_iterations) {
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= n");
  if (points.size() != n * dim) throw std::invalid_argument("kmeans: bad point matrix");
  auto sq = [&](const double* a, const double* b) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = a[j] - b[j];
      s += d * d;
    }
    return s;
  };
  KMeansResult res;
  res.centroids.assign(k * dim, 0.0);
  // k-means++ seeding
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.uniform_index(n);
  std::copy_n(points.begin() + first * dim, dim, res.centroids.begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], sq(&points[i * dim], &res.centroids[(c - 1) * dim]));
      total += best[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform01() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= best[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    std::copy_n(points.begin() + pick * dim, dim, res.centroids.begin() + c * dim);
  }

  res.assignment.assign(n, 0);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t arg = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq(&points[i * dim], &res.centroids[c * dim]);
        if (d < bd) {
          bd = d;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      if (it == 0 || arg != res.assignment[i]) changed = true;
      res.assignment[i] = arg;
      objective += bd;
    }
    // update; an emptied cluster keeps its previous centroid
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = res.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += points[i * dim + j];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t j = 0; j < dim; ++j)
          res.centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
    double after = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      after += sq(&points[i * dim], &res.centroids[res.assignment[i] * dim]);
    (void)objective;
    res.objective.push_back(after);
    res.iterations = it + 1;
    if (!changed) break;
  }
  return res;
}

DensitySplits density_splits(const InteractionDataset& ds, std::size_t k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("density_splits: k must be >= 2");
  const std::size_t n = ds.num_users(), m = ds.num_items();
  if (k > n) throw std::invalid_argument("density_splits: more clusters than users");
  std::vector<double> points(n * m, 0.0);
  for (const auto& r : ds.records) points[r.user * m + r.item] = 1.0;
  std::vector<double> items(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) items[i] += points[i * m + j];
    if (items[i] > 0.0) {
      const double inv = 1.0 / std::sqrt(items[i]);
      for (std::size_t j = 0; j < m; ++j) points[i * m + j] *= inv;
    }
  }
  DensitySplits out;
  out.clustering = kmeans(points, n, m, k, rng);
  const auto& a = out.clustering.assignment;

  std::vector<double> count_sum(k, 0.0);
  std::vector<std::size_t> members(k, 0);
  std::vector<double> dist(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = points[i * m + j] - out.clustering.centroids[a[i] * m + j];
      d += diff * diff;
    }
    count_sum[a[i]] += items[i];
    ++members[a[i]];
    dist[i] = std::sqrt(d);
  }
  std::size_t dense_cluster = 0;
  double best_mean = -1.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c] == 0) continue;
    const double mean = count_sum[c] / static_cast<double>(members[c]);
    if (mean > best_mean) {
      best_mean = mean;
      dense_cluster = c;
    }
  }
  std::vector<double> sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(n)));
  const double cut = sorted[std::max<std::size_t>(rank, 1) - 1];
  for (UserId u = 0; u < n; ++u) {
    if (a[u] == dense_cluster) out.dense_users.push_back(u);
    if (dist[u] > cut) out.sparse_users.push_back(u);
  }
  out.dense = restrict_users(ds, out.dense_users);
  out.sparse = restrict_users(ds, out.sparse_users);
  return out;
}

namespace {

void write_records(std::ofstream& out, UserId user, const std::vector<Interaction>& recs) {
  for (const auto& r : recs)
    out << user << '\t' << r.item << '\t' << r.value << '\t' << r.timestamp << '\n';
}

void write_pools(std::ofstream& out, UserId user, const char* part,
                 const std::vector<std::vector<ItemId>>& pools) {
  for (std::size_t i = 0; i < pools.size(); ++i) {
    out << user << '\t' << part << '\t' << i << '\t';
    for (std::size_t j = 0; j < pools[i].size(); ++j) out << (j ? "," : "") << pools[i][j];
    out << '\n';
  }
}

std::ofstream create(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  out.precision(17);
  return out;
}

}  // namespace

void write_prepared(const std::string& dir, const InteractionDataset& ds,
                    const SplitResult& splits) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto users = create(fs::path(dir) / "users.tsv");
  for (std::size_t u = 0; u < ds.num_users(); ++u) users << u << '\t' << ds.user_ids[u] << '\n';
  auto items = create(fs::path(dir) / "items.tsv");
  for (std::size_t i = 0; i < ds.num_items(); ++i) {
    const GeoPoint g = i < ds.item_geo.size() ? ds.item_geo[i] : GeoPoint{};
    items << i << '\t' << ds.item_ids[i] << '\t';
    if (g.known()) {
      items << g.lat << '\t' << g.lon;
    } else {
      items << "\t";
    }
    items << '\n';
  }
  auto train = create(fs::path(dir) / "train.tsv");
  auto weighting = create(fs::path(dir) / "weighting.tsv");
  auto test = create(fs::path(dir) / "test.tsv");
  auto negatives = create(fs::path(dir) / "negatives.tsv");
  for (const auto& s : splits.nodes) {
    write_records(train, s.user, s.train);
    write_records(weighting, s.user, s.weighting);
    write_records(test, s.user, s.test);
    write_pools(negatives, s.user, "test", s.test_negatives);
    write_pools(negatives, s.user, "weighting", s.weighting_negatives);
  }
}

PreparedData load_prepared(const std::string& dir) {
  namespace fs = std::filesystem;
  PreparedData out;
  auto& ds = out.dataset;
  auto lines = [&](const char* name, auto&& fn) {
    const auto path = (fs::path(dir) / name).string();
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = trim_cr(line);
      if (text.empty()) continue;
      fn(split_tabs(text), lineno, path);
    }
  };
  lines("users.tsv", [&](const auto& f, std::size_t ln, const std::string& p) {
    if (f.size() != 2) throw DataError(p + ": expected 2 fields", ln);
    ds.user_ids.emplace_back(f[1]);
  });
  lines("items.tsv", [&](const auto& f, std::size_t ln, const std::string& p) {
    if (f.size() != 4) throw DataError(p + ": expected 4 fields", ln);
    ds.item_ids.emplace_back(f[1]);
    GeoPoint g;
    if (!f[2].empty() && !(parse_number(f[2], g.lat) && parse_number(f[3], g.lon)))
      throw DataError(p + ": bad coordinates", ln);
    ds.item_geo.push_back(g);
  });
  std::map<UserId, NodeSplit> nodes;
  auto records = [&](const char* name, std::vector<Interaction> NodeSplit::*member) {
    lines(name, [&](const auto& f, std::size_t ln, const std::string& p) {
      Interaction r;
      if (f.size() != 4 || !parse_number(f[0], r.user) || !parse_number(f[1], r.item) ||
          !parse_number(f[2], r.value) || !parse_number(f[3], r.timestamp))
        throw DataError(p + ": malformed record", ln);
      if (r.user >= ds.num_users() || r.item >= ds.num_items())
        throw DataError(p + ": id out of vocabulary", ln);
      auto& s = nodes[r.user];
      s.user = r.user;
      (s.*member).push_back(r);
    });
  };
  records("train.tsv", &NodeSplit::train);
  records("weighting.tsv", &NodeSplit::weighting);
  records("test.tsv", &NodeSplit::test);
  lines("negatives.tsv", [&](const auto& f, std::size_t ln, const std::string& p) {
    UserId u;
    std::size_t idx;
    if (f.size() != 4 || !parse_number(f[0], u) || !parse_number(f[2], idx))
      throw DataError(p + ": malformed pool", ln);
    auto it = nodes.find(u);
    if (it == nodes.end()) throw DataError(p + ": pool for unknown user", ln);
    auto& pools = f[1] == "test" ? it->second.test_negatives : it->second.weighting_negatives;
    if (idx != pools.size()) throw DataError(p + ": pools out of order", ln);
    std::vector<ItemId> pool;
    std::string_view rest = f[3];
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      ItemId item;
      if (!parse_number(rest.substr(0, comma), item) || item >= ds.num_items())
        throw DataError(p + ": bad pool item", ln);
      pool.push_back(item);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    pools.push_back(std::move(pool));
  });
  for (auto& [u, s] : nodes) {
    for (const auto* part : {&s.train, &s.weighting, &s.test})
      for (const auto& r : *part) {
        s.interacted.push_back(r.item);
        ds.records.push_back(r);
      }
    std::sort(s.interacted.begin(), s.interacted.end());
    s.interacted.erase(std::unique(s.interacted.begin(), s.interacted.end()), s.interacted.end());
    if (s.test_negatives.size() != s.test.size() ||
        s.weighting_negatives.size() != s.weighting.size())
      throw DataError("negative pools do not match split sizes for user " + std::to_string(u));
    out.splits.nodes.push_back(std::move(s));
  }
  return out;
}

}  // namespace gossiprec
