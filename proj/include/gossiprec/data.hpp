#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gossiprec/geo.hpp"
#include "gossiprec/param_vector.hpp"
#include "gossiprec/rng.hpp"

namespace gossiprec {

using UserId = std::uint32_t;

/// Malformed or unusable input data. `line` is 1-based, 0 when not applicable.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline constexpr std::uint32_t kNoCategory = ~std::uint32_t{0};

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  double value = 1.0;
  std::int64_t timestamp = 0;
  GeoPoint geo;
  std::uint32_t category = kNoCategory;

  bool operator==(const Interaction&) const = default;
};

/// Interaction records over dense user/item ids, with the raw-id vocabularies.
struct InteractionDataset {
  std::vector<Interaction> records;
  std::vector<std::string> user_ids;  ///< dense id -> raw id
  std::vector<std::string> item_ids;
  std::vector<std::string> categories;
  std::vector<GeoPoint> item_geo;  ///< per dense item; unknown for rating data

  std::size_t num_users() const noexcept { return user_ids.size(); }
  std::size_t num_items() const noexcept { return item_ids.size(); }
};

/// `user \t item \t rating \t timestamp` lines (MovieLens u.data).
InteractionDataset load_movielens(const std::string& path);
/// `user \t venue \t ISO-8601 time \t lat \t lon \t category` lines.
InteractionDataset load_checkins(const std::string& path);

/// Seconds since the Unix epoch for YYYY-MM-DDTHH:MM:SS[.fff][Z|(+|-)HH:MM].
std::optional<std::int64_t> parse_iso8601(std::string_view text);

/// Iteratively drops items with fewer than `min_item_users` distinct users and
/// users with fewer than `min_user_items` records until neither rule fires.
InteractionDataset filter_min_counts(const InteractionDataset& ds, std::size_t min_item_users,
                                     std::size_t min_user_items);

InteractionDataset binarize(const InteractionDataset& ds);

/// Keeps only `users` (dense ids of `ds`) and re-indexes users and items.
InteractionDataset restrict_users(const InteractionDataset& ds, const std::vector<UserId>& users);

/// 1 - mean(distinct items per user) / |items|.
double sparsity(const InteractionDataset& ds);

struct SplitOptions {
  double test_ratio = 0.15;
  /// Latest records become the test set; otherwise the split is seeded-random.
  bool chronological = false;
  /// Collapse repeated (user, item) pairs before splitting.
  bool distinct_items = true;
  std::size_t num_negatives = 100;
};

/// One user's disjoint train / weighting / test records, plus a fixed pool of
/// never-interacted negatives for every test and weighting record.
struct NodeSplit {
  UserId user = 0;
  std::vector<Interaction> train;  ///< chronological for check-in splits
  std::vector<Interaction> weighting;
  std::vector<Interaction> test;
  std::vector<std::vector<ItemId>> test_negatives;
  std::vector<std::vector<ItemId>> weighting_negatives;
  std::vector<ItemId> interacted;  ///< sorted distinct items of the user
};

/// round(ratio * n), halves rounded up, at least 1.
std::size_t test_size_for(std::size_t n, double ratio);

/// nullopt when the user has fewer than 3 records.
std::optional<NodeSplit> split_user(const InteractionDataset& ds, UserId user,
                                    const SplitOptions& opts, Rng& rng);

struct SplitResult {
  std::vector<NodeSplit> nodes;  ///< ascending user id
  std::size_t excluded_users = 0;
};

/// Splits every user with an independent stream derived from `seed`.
SplitResult split_all(const InteractionDataset& ds, const SplitOptions& opts,
                      std::uint64_t seed);

struct KMeansResult {
  std::vector<std::uint32_t> assignment;
  std::vector<double> centroids;  ///< k x dim, row-major
  std::vector<double> objective;  ///< sum of squared distances after each iteration
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. `points` is n x dim, row-major.
KMeansResult kmeans(const std::vector<double>& points, std::size_t n, std::size_t dim,
                    std::size_t k, Rng& rng, std::size_t max_iterations = 100);

struct DensitySplits {
  InteractionDataset dense;
  InteractionDataset sparse;
  std::vector<UserId> dense_users;
  std::vector<UserId> sparse_users;
  KMeansResult clustering;
};

/// Clusters users by their unit-normalized binary item vectors. Dense: members of the
/// cluster with the highest mean interaction count. Sparse: users whose
/// centroid distance exceeds the 75th-percentile distance.
DensitySplits density_splits(const InteractionDataset& ds, std::size_t k, Rng& rng);

/// Writes train/weighting/test/negatives/users/items TSV files into `dir`.
void write_prepared(const std::string& dir, const InteractionDataset& ds,
                    const SplitResult& splits);

struct PreparedData {
  InteractionDataset dataset;
  SplitResult splits;
};
PreparedData load_prepared(const std::string& dir);

}  // namespace gossiprec
