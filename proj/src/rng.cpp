#include "gossiprec/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace gossiprec {

double Rng::exponential(double mean) {
  // 1 - u lies in (0, 1], so the log is finite
  return -mean * std::log(1.0 - uniform01());
}

std::vector<std::uint64_t> Rng::sample_indices(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw std::invalid_argument("sample_indices: k exceeds population");
  std::vector<std::uint64_t> out;
  out.reserve(k);
  // sparse partial Fisher-Yates over a virtual identity permutation
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto at = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + uniform_index(n - i);
    const std::uint64_t vi = at(i);
    const std::uint64_t vj = at(j);
    out.push_back(vj);
    swapped[j] = vi;
  }
  return out;
}

}  // namespace gossiprec
