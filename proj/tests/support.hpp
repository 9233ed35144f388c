#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "gossiprec/data.hpp"
#include "gossiprec/rng.hpp"

namespace testing {

inline gossiprec::ParamVector random_params(gossiprec::Rng& rng, std::size_t a, std::size_t b,
                                            double scale = 1.0) {
  gossiprec::ParamVector p;
  p.add_segment("first", a);
  p.add_segment("second", b);
  for (double& v : p.values()) v = rng.uniform(-scale, scale);
  return p;
}

/// ML-100k u.data location, or empty when it is not available.
inline std::string ml100k_path() {
  std::vector<std::string> candidates;
  if (const char* env = std::getenv("GOSSIPREC_ML100K")) candidates.emplace_back(env);
#ifdef GOSSIPREC_DEFAULT_ML100K
  candidates.emplace_back(GOSSIPREC_DEFAULT_ML100K);
#endif
  for (const auto& c : candidates)
    if (std::filesystem::exists(c)) return c;
  return {};
}

/// Temporary directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("gossiprec_" + tag + "_" + std::to_string(std::rand()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

/// Small synthetic dataset: `users` users over `items` items, each user
/// touching `per_user` distinct items with a popularity skew.
inline gossiprec::InteractionDataset synthetic_dataset(std::size_t users, std::size_t items,
                                                       std::size_t per_user, std::uint64_t seed) {
  gossiprec::Rng rng(seed);
  gossiprec::InteractionDataset ds;
  for (std::size_t i = 0; i < items; ++i) ds.item_ids.push_back("i" + std::to_string(i));
  ds.item_geo.resize(items);
  for (std::size_t u = 0; u < users; ++u) {
    ds.user_ids.push_back("u" + std::to_string(u));
    std::vector<bool> taken(items, false);
    std::size_t got = 0;
    while (got < per_user) {
      // squaring a uniform favours low ids: a popularity skew
      const double x = rng.uniform01();
      const auto it = static_cast<std::size_t>(x * x * static_cast<double>(items));
      if (taken[it]) continue;
      taken[it] = true;
      ++got;
      gossiprec::Interaction r;
      r.user = static_cast<gossiprec::UserId>(u);
      r.item = static_cast<gossiprec::ItemId>(it);
      r.timestamp = static_cast<std::int64_t>(got);
      ds.records.push_back(r);
    }
  }
  return ds;
}

}  // namespace testing
