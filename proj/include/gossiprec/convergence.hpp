#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace gossiprec {

/// Plateau detector over a stream of checkpoint metrics.
///
/// After observation n (1-based, n >= window) the stream has converged when
/// the best value among the last `window` observations exceeds the best
/// value seen before them by less than `delta`. Before the window has moved
/// past the first observation, that first observation is the reference.
class ConvergenceTracker {
 public:
  ConvergenceTracker(std::size_t window = 10, double delta = 0.001);

  /// Records `metric` (in [0, 1]) taken when the node had completed `rounds`
  /// communication rounds. Returns true once converged; frozen afterwards.
  bool observe(double metric, std::uint64_t rounds);

  bool converged() const noexcept { return converged_at_.has_value(); }
  /// Rounds completed at the checkpoint where convergence was detected.
  std::optional<std::uint64_t> rounds_at_convergence() const noexcept { return converged_at_; }
  /// 1-based observation index at which convergence was detected.
  std::optional<std::size_t> checkpoint_at_convergence() const noexcept { return converged_idx_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::size_t window_;
  double delta_;
  std::vector<double> history_;
  std::optional<std::uint64_t> converged_at_;
  std::optional<std::size_t> converged_idx_;
};

/// Free-function form used by the simulator.
inline bool detect_convergence(ConvergenceTracker& tracker, double metric, std::uint64_t rounds) {
  return tracker.observe(metric, rounds);
}

}  // namespace gossiprec
