#include "gossiprec/convergence.hpp"

#include <algorithm>
#include <stdexcept>

namespace gossiprec {

ConvergenceTracker::ConvergenceTracker(std::size_t window, double delta)
    : window_(window), delta_(delta) {
  if (window_ == 0) throw std::invalid_argument("convergence window must be positive");
}

bool ConvergenceTracker::observe(double metric, std::uint64_t rounds) {
  if (!(metric >= 0.0 && metric <= 1.0))
    throw std::domain_error("convergence metric outside [0, 1]");
  if (converged_at_) return true;
  history_.push_back(metric);
  const std::size_t n = history_.size();
  if (n < window_) return false;
  const std::size_t split = std::max<std::size_t>(n - window_, 1);
  const double before = *std::max_element(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(split));
  const double recent = *std::max_element(history_.end() - static_cast<std::ptrdiff_t>(window_), history_.end());
  if (recent - before < delta_) {
    converged_at_ = rounds;
    converged_idx_ = n;
  }
  return converged_at_.has_value();
}

}  // namespace gossiprec
