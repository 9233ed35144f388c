#pragma once

#include <span>
#include <vector>

#include "gossiprec/param_vector.hpp"

namespace gossiprec {

/// Top-k candidates by descending score; equal scores go to the lower id.
/// Requires k <= candidates.size() and scores.size() == candidates.size().
std::vector<ItemId> top_k(std::span<const ItemId> candidates, std::span<const double> scores,
                          std::size_t k);

/// 0-based position `candidates[index]` would take in the full ranking.
std::size_t rank_position(std::size_t index, std::span<const ItemId> candidates,
                          std::span<const double> scores);

}  // namespace gossiprec
