// Command-line runner: prepare datasets, run gossip or federated training,
// and compare finished runs.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "gossiprec/experiment.hpp"

namespace fs = std::filesystem;
using namespace gossiprec;

namespace {

enum Exit { kOk = 0, kConfigError = 2, kDataError = 3, kRuntimeError = 4 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string dataset;
  std::string format;
  std::string density;
  std::string mode;
  std::string aggregator;
  std::optional<double> alpha;
  std::optional<std::size_t> view_size;
  std::string k;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "config file (key = value lines)");
  cmd->add_option("--seed", o.seed, "global seed");
  cmd->add_option("--dataset", o.dataset, "dataset path");
  cmd->add_option("--format", o.format, "movielens | checkins | prepared");
  cmd->add_option("--density", o.density, "full | dense | sparse");
  cmd->add_option("--set", o.set, "extra key=value overrides")->allow_extra_args(false);
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) set_config_value(cfg, key, v);
  };
  if (o.seed) cfg.sim.seed = *o.seed;
  put("dataset", o.dataset);
  put("dataset_format", o.format);
  put("density", o.density);
  put("mode", o.mode);
  put("aggregator", o.aggregator);
  if (o.alpha) cfg.sim.alpha = *o.alpha;
  if (o.view_size) cfg.sim.view_size = *o.view_size;
  put("k_list", o.k);
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (cfg.dataset.empty()) {
    if (const char* env = std::getenv("GOSSIPREC_ML100K")) cfg.dataset = env;
  }
  validate(cfg);
  return cfg;
}

int cmd_prepare(const Overrides& o, const std::string& out) {
  const auto cfg = build_config(o);
  const auto data = prepare_data(cfg);
  write_prepared(out, data.dataset, data.splits);
  std::size_t train = 0, weighting = 0, test = 0;
  for (const auto& s : data.splits.nodes) {
    train += s.train.size();
    weighting += s.weighting.size();
    test += s.test.size();
  }
  nlohmann::ordered_json m;
  m["dataset"] = cfg.dataset;
  m["format"] = cfg.dataset_format;
  m["seed"] = cfg.sim.seed;
  m["users"] = data.dataset.num_users();
  m["items"] = data.dataset.num_items();
  m["records"] = data.dataset.records.size();
  m["sparsity"] = sparsity(data.dataset);
  m["nodes"] = data.splits.nodes.size();
  m["excluded_users"] = data.splits.excluded_users;
  m["train_records"] = train;
  m["weighting_records"] = weighting;
  m["test_records"] = test;
  std::ofstream(fs::path(out) / "manifest.json") << m.dump(2) << '\n';
  std::ofstream(fs::path(out) / "config.txt") << serialize_config(cfg);
  std::printf("prepared %zu nodes, %zu items, sparsity %.4f -> %s\n", data.splits.nodes.size(),
              data.dataset.num_items(), sparsity(data.dataset), out.c_str());
  return kOk;
}

int cmd_run(const Overrides& o, const std::string& out) {
  const auto cfg = build_config(o);
  const auto data = prepare_data(cfg);
  const auto report = run_experiment(cfg, data);
  write_run(out, report, serialize_config(cfg));
  const auto cols = metric_columns(report.family, report.ks);
  std::printf("status %s, %zu nodes", report.status.c_str(), report.nodes.size());
  for (const auto& c : cols) std::printf(", %s %.4f", c.c_str(), report.average(c));
  std::printf(", mean convergence rounds %.1f -> %s\n", report.mean_convergence_rounds(),
              out.c_str());
  return report.status == "deadlock" ? kRuntimeError : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gossip learning recommender experiments"};
  app.require_subcommand(1);

  Overrides prep, run;
  std::string prep_out, run_out, report_out;
  std::vector<std::string> run_dirs;

  auto* p = app.add_subcommand("prepare", "filter and split a dataset into node files");
  add_common(p, prep);
  p->add_option("--out", prep_out, "output directory")->required();

  auto* r = app.add_subcommand("run", "run one experiment and write its report directory");
  add_common(r, run);
  r->add_option("--mode", run.mode, "gossip | federated");
  r->add_option("--aggregator", run.aggregator,
                "performance | fedavg | age | reptile-decentralized");
  r->add_option("--alpha", run.alpha, "exploration ratio in [0, 1]");
  r->add_option("--view-size", run.view_size, "peers per view");
  r->add_option("--k", run.k, "comma-separated cutoffs, e.g. 5,10,20");
  r->add_option("--out", run_out, "output directory")->required();

  auto* c = app.add_subcommand("report", "compare run directories");
  c->add_option("runs", run_dirs, "run directories")->required();
  c->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*p) return cmd_prepare(prep, prep_out);
    if (*r) return cmd_run(run, run_out);
    compare_runs(run_dirs, report_out);
    std::printf("compared %zu runs -> %s\n", run_dirs.size(), report_out.c_str());
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
