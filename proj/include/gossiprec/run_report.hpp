#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gossiprec/eval.hpp"

namespace gossiprec {

enum class EventKind { push, deliver, view_update, checkpoint };

std::string_view to_string(EventKind k) noexcept;

/// One processed event, recorded when tracing is enabled.
struct TraceEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::push;
  NodeId node = 0;  ///< pusher, receiver or refreshing node
  NodeId peer = 0;  ///< sender of a delivered model

  bool operator==(const TraceEvent&) const = default;
};

struct NodeReport {
  NodeId node = 0;
  UserId user = 0;
  NodeMetrics metrics;            ///< on the local test set
  double weighting_metric = 0.0;  ///< headline metric on the weighting set
  std::uint64_t rounds = 0;       ///< models pushed (communication rounds)
  std::optional<std::uint64_t> rounds_at_convergence;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t epochs = 0;
  std::uint64_t sgd_steps = 0;
  std::uint64_t merges = 0;
  std::uint64_t degenerate_merges = 0;
  // wall clock, excluded from the deterministic outputs
  double sgd_seconds = 0.0;
  double aggregation_seconds = 0.0;
};

struct TrajectoryRow {
  std::size_t checkpoint = 0;
  double time = 0.0;
  NodeId node = 0;
  std::uint64_t rounds = 0;
  double weighting_metric = 0.0;
  std::vector<double> values;  ///< metric_columns order
};

struct RunReport {
  std::string status;  ///< "horizon", "converged", "completed" or "deadlock"
  ModelFamily family = ModelFamily::gmf;
  std::vector<int> ks;
  std::vector<NodeReport> nodes;
  std::vector<TrajectoryRow> trajectory;
  std::vector<TraceEvent> trace;
  std::size_t excluded_nodes = 0;
  double end_time = 0.0;
  std::size_t checkpoints = 0;
  std::uint64_t events = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t bytes_sent = 0;

  /// Mean of a metric column over nodes with defined metrics.
  double average(std::string_view column) const;
  /// Mean rounds to convergence; unconverged nodes count with their final
  /// round total.
  double mean_convergence_rounds() const;
  std::size_t converged_nodes() const;
  /// Mean sgd + aggregation seconds per node.
  double mean_compute_seconds() const;
};

/// Writes config.txt, report.csv, trajectory.csv, cdf_<metric>.csv,
/// summary.json and, when tracing, trace.csv. Wall-clock accounting goes
/// to timing/ so that everything else is reproducible byte for byte.
void write_run(const std::string& dir, const RunReport& report, const std::string& config_text);

/// Per-node rows of a written report.csv, keyed by column name.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

ReportTable read_report_csv(const std::string& path);

/// Compares run directories: writes comparison.csv (one row per run) and
/// cdf_<metric>.csv in long format into `out_dir`. Averages are recomputed
/// from each report.csv and cross-checked against its summary.json.
void compare_runs(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace gossiprec
