#pragma once

#include <cmath>

namespace gossiprec {

inline double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow.
inline double log_sigmoid(double x) noexcept {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Binary cross-entropy of a logit against a {0,1} label.
inline double bce_from_logit(double s, double label) noexcept {
  return -(label * log_sigmoid(s) + (1.0 - label) * log_sigmoid(-s));
}

}  // namespace gossiprec
