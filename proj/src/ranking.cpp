#include "gossiprec/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gossiprec {

namespace {
// NaN scores rank below everything else
double key(double x) { return std::isnan(x) ? -std::numeric_limits<double>::infinity() : x; }

struct Better {
  std::span<const ItemId> c;
  std::span<const double> s;
  bool operator()(std::size_t a, std::size_t b) const {
    const double x = key(s[a]), y = key(s[b]);
    if (x != y) return x > y;
    return c[a] < c[b];
  }
};
}  // namespace

std::vector<ItemId> top_k(std::span<const ItemId> candidates, std::span<const double> scores,
                          std::size_t k) {
  if (scores.size() != candidates.size())
    throw std::invalid_argument("top_k: scores and candidates differ in length");
  if (k > candidates.size()) throw std::invalid_argument("top_k: k exceeds candidate count");
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), 0);
  const Better better{candidates, scores};
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  std::vector<ItemId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = candidates[idx[i]];
  return out;
}

std::size_t rank_position(std::size_t index, std::span<const ItemId> candidates,
                          std::span<const double> scores) {
  const Better better{candidates, scores};
  std::size_t pos = 0;
  for (std::size_t j = 0; j < candidates.size(); ++j)
    if (j != index && better(j, index)) ++pos;
  return pos;
}

}  // namespace gossiprec
