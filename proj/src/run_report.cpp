#include "gossiprec/run_report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gossiprec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::push: return "push";
    case EventKind::deliver: return "deliver";
    case EventKind::view_update: return "view_update";
    case EventKind::checkpoint: return "checkpoint";
  }
  return "?";
}

namespace {

// shortest representation that reads back to the same double
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string file_stem(std::string_view column) {
  std::string s(column);
  std::replace(s.begin(), s.end(), '@', '_');
  return s;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json percentile_json(const std::vector<double>& values) {
  json j = json::object();
  if (values.empty()) return j;
  for (const auto& [p, v] : cdf_and_percentiles(values).percentiles) j[fmt(p)] = v;
  return j;
}

void write_cdf(const fs::path& p, const std::vector<double>& values) {
  auto out = open_out(p);
  out << "value,cdf\n";
  if (values.empty()) return;
  for (const auto& [x, y] : cdf_and_percentiles(values).cdf) out << fmt(x) << ',' << fmt(y) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

double RunReport::average(std::string_view column) const {
  const auto cols = metric_columns(family, ks);
  const auto it = std::find(cols.begin(), cols.end(), column);
  if (it == cols.end()) throw std::invalid_argument("unknown metric column " + std::string(column));
  const auto j = static_cast<std::size_t>(it - cols.begin());
  std::vector<double> v;
  for (const auto& n : nodes)
    if (n.metrics.defined) v.push_back(metric_values(family, n.metrics)[j]);
  return mean(v);
}

double RunReport::mean_convergence_rounds() const {
  std::vector<double> v;
  for (const auto& n : nodes)
    v.push_back(static_cast<double>(n.rounds_at_convergence.value_or(n.rounds)));
  return mean(v);
}

std::size_t RunReport::converged_nodes() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const NodeReport& n) { return n.rounds_at_convergence.has_value(); }));
}

double RunReport::mean_compute_seconds() const {
  std::vector<double> v;
  for (const auto& n : nodes) v.push_back(n.sgd_seconds + n.aggregation_seconds);
  return mean(v);
}

void write_run(const std::string& dir, const RunReport& report, const std::string& config_text) {
  const fs::path root(dir);
  fs::create_directories(root / "timing");
  open_out(root / "config.txt") << config_text;

  const auto cols = metric_columns(report.family, report.ks);
  std::vector<std::vector<double>> per_metric(cols.size());
  std::vector<double> weighting, rounds, conv_rounds;
  {
    auto out = open_out(root / "report.csv");
    out << "node,user,items,defined";
    for (const auto& c : cols) out << ',' << c;
    out << ",weighting_metric,rounds,converged,rounds_at_convergence,messages_sent,"
           "messages_received,bytes_sent,epochs,sgd_steps,merges,degenerate_merges\n";
    for (const auto& n : report.nodes) {
      const auto vals = metric_values(report.family, n.metrics);
      out << n.node << ',' << n.user << ',' << n.metrics.items << ',' << (n.metrics.defined ? 1 : 0);
      for (double v : vals) out << ',' << fmt(v);
      out << ',' << fmt(n.weighting_metric) << ',' << n.rounds << ','
          << (n.rounds_at_convergence ? 1 : 0) << ',';
      if (n.rounds_at_convergence) out << *n.rounds_at_convergence;
      out << ',' << n.messages_sent << ',' << n.messages_received << ',' << n.bytes_sent << ','
          << n.epochs << ',' << n.sgd_steps << ',' << n.merges << ',' << n.degenerate_merges << '\n';
      if (n.metrics.defined)
        for (std::size_t j = 0; j < cols.size(); ++j) per_metric[j].push_back(vals[j]);
      weighting.push_back(n.weighting_metric);
      rounds.push_back(static_cast<double>(n.rounds));
      conv_rounds.push_back(static_cast<double>(n.rounds_at_convergence.value_or(n.rounds)));
    }
  }
  {
    auto out = open_out(root / "trajectory.csv");
    out << "checkpoint,time,node,rounds,weighting_metric";
    for (const auto& c : cols) out << ',' << c;
    out << '\n';
    for (const auto& r : report.trajectory) {
      out << r.checkpoint << ',' << fmt(r.time) << ',' << r.node << ',' << r.rounds << ','
          << fmt(r.weighting_metric);
      for (double v : r.values) out << ',' << fmt(v);
      out << '\n';
    }
  }
  for (std::size_t j = 0; j < cols.size(); ++j)
    write_cdf(root / ("cdf_" + file_stem(cols[j]) + ".csv"), per_metric[j]);
  write_cdf(root / "cdf_convergence_rounds.csv", conv_rounds);

  if (!report.trace.empty()) {
    auto out = open_out(root / "trace.csv");
    out << "time,seq,kind,node,peer\n";
    for (const auto& e : report.trace)
      out << fmt(e.time) << ',' << e.seq << ',' << to_string(e.kind) << ',' << e.node << ','
          << e.peer << '\n';
  }

  json s;
  s["status"] = report.status;
  s["model"] = std::string(to_string(report.family));
  s["nodes"] = report.nodes.size();
  s["evaluated_nodes"] = per_metric.empty() ? 0 : per_metric[0].size();
  s["excluded_nodes"] = report.excluded_nodes;
  s["end_time"] = report.end_time;
  s["checkpoints"] = report.checkpoints;
  s["events"] = report.events;
  s["messages_sent"] = report.messages_sent;
  s["messages_delivered"] = report.messages_delivered;
  s["bytes_sent"] = report.bytes_sent;
  json avg = json::object(), pct = json::object();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    avg[cols[j]] = mean(per_metric[j]);
    pct[cols[j]] = percentile_json(per_metric[j]);
  }
  s["averages"] = avg;
  s["percentiles"] = pct;
  s["weighting_metric_average"] = mean(weighting);
  s["mean_rounds"] = mean(rounds);
  s["convergence"] = {{"converged_nodes", report.converged_nodes()},
                      {"mean_rounds", mean(conv_rounds)},
                      {"percentiles", percentile_json(conv_rounds)}};
  open_out(root / "summary.json") << s.dump(2) << '\n';

  // wall-clock accounting
  std::vector<double> sgd, agg, total;
  {
    auto out = open_out(root / "timing" / "overhead.csv");
    out << "node,sgd_seconds,aggregation_seconds,compute_seconds,rounds\n";
    for (const auto& n : report.nodes) {
      sgd.push_back(n.sgd_seconds);
      agg.push_back(n.aggregation_seconds);
      total.push_back(n.sgd_seconds + n.aggregation_seconds);
      out << n.node << ',' << fmt(n.sgd_seconds) << ',' << fmt(n.aggregation_seconds) << ','
          << fmt(total.back()) << ',' << n.rounds << '\n';
    }
  }
  write_cdf(root / "timing" / "cdf_compute_seconds.csv", total);
  json t;
  t["mean_sgd_seconds"] = mean(sgd);
  t["mean_aggregation_seconds"] = mean(agg);
  t["mean_compute_seconds"] = mean(total);
  t["compute_seconds_percentiles"] = percentile_json(total);
  open_out(root / "timing" / "summary.json") << t.dump(2) << '\n';
}

std::size_t ReportTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::runtime_error("report has no column " + std::string(name));
  return static_cast<std::size_t>(it - columns.begin());
}

ReportTable read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  ReportTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty report");
  t.columns = split_csv(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv(line);
    if (row.size() != t.columns.size()) throw std::runtime_error(path + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void compare_runs(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  if (run_dirs.empty()) throw std::invalid_argument("no run directories given");
  fs::create_directories(out_dir);

  struct Run {
    std::string label;
    std::vector<std::string> metrics;
    std::map<std::string, std::vector<double>> values;
    std::vector<double> conv_rounds;
    json summary;
  };
  std::vector<Run> runs;
  std::vector<std::string> all_metrics;
  for (const auto& dir : run_dirs) {
    Run r;
    r.label = fs::path(dir).filename().string();
    if (r.label.empty()) r.label = fs::path(dir).parent_path().filename().string();
    const auto table = read_report_csv((fs::path(dir) / "report.csv").string());
    std::ifstream sin(fs::path(dir) / "summary.json");
    if (!sin) throw std::runtime_error(dir + ": missing summary.json");
    r.summary = json::parse(sin);
    const auto first = table.column("defined") + 1, last = table.column("weighting_metric");
    for (std::size_t c = first; c < last; ++c) r.metrics.push_back(table.columns[c]);
    const auto defined = table.column("defined"), rounds = table.column("rounds"),
               conv = table.column("rounds_at_convergence");
    for (const auto& row : table.rows) {
      if (row[defined] == "1")
        for (std::size_t c = first; c < last; ++c)
          r.values[table.columns[c]].push_back(std::stod(row[c]));
      r.conv_rounds.push_back(std::stod(row[conv].empty() ? row[rounds] : row[conv]));
    }
    for (const auto& m : r.metrics) {
      const double recomputed = mean(r.values[m]);
      const double stored = r.summary.at("averages").at(m).get<double>();
      if (std::abs(recomputed - stored) > 1e-12)
        throw std::runtime_error(dir + ": summary average of " + m + " disagrees with report.csv");
      if (std::find(all_metrics.begin(), all_metrics.end(), m) == all_metrics.end())
        all_metrics.push_back(m);
    }
    runs.push_back(std::move(r));
  }

  const std::vector<double> ps = {50, 90, 99, 99.9};
  auto out = open_out(fs::path(out_dir) / "comparison.csv");
  out << "run,status,nodes";
  for (const auto& m : all_metrics) {
    out << ',' << m;
    for (double p : ps) out << ',' << m << "_p" << fmt(p);
  }
  out << ",mean_convergence_rounds,converged_nodes,bytes_sent\n";
  for (const auto& r : runs) {
    out << r.label << ',' << r.summary.value("status", "") << ','
        << r.summary.value("nodes", std::size_t{0});
    for (const auto& m : all_metrics) {
      const auto it = r.values.find(m);
      if (it == r.values.end() || it->second.empty()) {
        out << ',';
        for (std::size_t i = 0; i < ps.size(); ++i) out << ',';
        continue;
      }
      out << ',' << fmt(mean(it->second));
      for (const auto& [p, v] : cdf_and_percentiles(it->second, ps).percentiles) out << ',' << fmt(v);
    }
    out << ',' << fmt(mean(r.conv_rounds)) << ','
        << r.summary.at("convergence").value("converged_nodes", std::size_t{0}) << ','
        << r.summary.value("bytes_sent", std::uint64_t{0}) << '\n';
  }

  for (const auto& m : all_metrics) {
    auto cdf = open_out(fs::path(out_dir) / ("cdf_" + file_stem(m) + ".csv"));
    cdf << "run,value,cdf\n";
    for (const auto& r : runs) {
      const auto it = r.values.find(m);
      if (it == r.values.end() || it->second.empty()) continue;
      for (const auto& [x, y] : cdf_and_percentiles(it->second).cdf)
        cdf << r.label << ',' << fmt(x) << ',' << fmt(y) << '\n';
    }
  }
}

}  // namespace gossiprec
