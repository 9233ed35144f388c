#include "gossiprec/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace gossiprec {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(std::string(key) + ": not a non-negative integer: '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::vector<int> to_int_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto end = std::min(v.find(',', start), v.size());
    out.push_back(to_int<int>(key, trim(v.substr(start, end - start))));
    start = end + 1;
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define REAL(key, field)                                                                   \
  Key {                                                                                    \
    key, [](ExperimentConfig& c, std::string_view v) { c.field = to_double(key, v); },     \
        [](const ExperimentConfig& c) { return fmt(c.field); }                             \
  }
#define UINT(key, field)                                                                   \
  Key {                                                                                    \
    key,                                                                                   \
        [](ExperimentConfig& c, std::string_view v) {                                      \
          c.field = to_int<std::decay_t<decltype(c.field)>>(key, v);                       \
        },                                                                                 \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                  \
  }
#define FLAG(key, field)                                                                   \
  Key {                                                                                    \
    key, [](ExperimentConfig& c, std::string_view v) { c.field = to_bool(key, v); },       \
        [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); }  \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      {"mode",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "gossip")
           c.mode = RunMode::gossip;
         else if (v == "federated")
           c.mode = RunMode::federated;
         else
           throw ConfigError("mode: expected gossip or federated");
       },
       [](const ExperimentConfig& c) {
         return std::string(c.mode == RunMode::gossip ? "gossip" : "federated");
       }},
      {"fl_algorithm",
       [](ExperimentConfig& c, std::string_view v) {
         if (v != "fedavg" && v != "reptile")
           throw ConfigError("fl_algorithm: expected fedavg or reptile");
         c.fl_algorithm = std::string(v);
       },
       [](const ExperimentConfig& c) { return c.fl_algorithm; }},
      {"model",
       [](ExperimentConfig& c, std::string_view v) { c.sim.model.family = parse_model_family(v); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.sim.model.family)); }},
      {"aggregator",
       [](ExperimentConfig& c, std::string_view v) { c.sim.aggregator = parse_aggregator(v); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.sim.aggregator)); }},
      {"sampler",
       [](ExperimentConfig& c, std::string_view v) { c.sim.sampler = parse_sampler(v); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.sim.sampler)); }},
      REAL("alpha", sim.alpha),
      UINT("view_size", sim.view_size),
      UINT("seed", sim.seed),
      {"dataset", [](ExperimentConfig& c, std::string_view v) { c.dataset = std::string(v); },
       [](const ExperimentConfig& c) { return c.dataset; }},
      {"dataset_format",
       [](ExperimentConfig& c, std::string_view v) {
         if (v != "movielens" && v != "checkins" && v != "prepared")
           throw ConfigError("dataset_format: expected movielens, checkins or prepared");
         c.dataset_format = std::string(v);
       },
       [](const ExperimentConfig& c) { return c.dataset_format; }},
      {"density",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "full")
           c.density = DensitySubset::full;
         else if (v == "dense")
           c.density = DensitySubset::dense;
         else if (v == "sparse")
           c.density = DensitySubset::sparse;
         else
           throw ConfigError("density: expected full, dense or sparse");
       },
       [](const ExperimentConfig& c) {
         switch (c.density) {
           case DensitySubset::dense: return std::string("dense");
           case DensitySubset::sparse: return std::string("sparse");
           default: return std::string("full");
         }
       }},
      UINT("density_k", density_k),
      UINT("min_item_users", min_item_users),
      UINT("min_user_items", min_user_items),
      FLAG("binarize", binarize),
      REAL("test_ratio", test_ratio),
      UINT("num_negatives", num_negatives),
      UINT("gmf_dim", sim.model.gmf.dim),
      Key{"gmf_neg_ratio",
          [](ExperimentConfig& c, std::string_view v) {
            c.sim.model.gmf.neg_ratio = to_int<int>("gmf_neg_ratio", v);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.sim.model.gmf.neg_ratio); }},
      REAL("gmf_lr", sim.model.gmf.lr),
      REAL("gmf_l2", sim.model.gmf.l2),
      REAL("gmf_init_scale", sim.model.gmf.init_scale),
      REAL("gmf_output_init_gain", sim.model.gmf.output_init_gain),
      UINT("prmeg_dim", sim.model.prmeg.dim),
      REAL("prmeg_mix_weight", sim.model.prmeg.mix_weight),
      REAL("prmeg_lr", sim.model.prmeg.lr),
      REAL("prmeg_lambda", sim.model.prmeg.lambda),
      REAL("prmeg_tau_km", sim.model.prmeg.tau_km),
      REAL("prmeg_init_scale", sim.model.prmeg.init_scale),
      REAL("push_period", sim.push_period),
      REAL("push_jitter", sim.push_jitter),
      REAL("peer_sampling_period", sim.peer_sampling_period),
      REAL("checkpoint_period", sim.checkpoint_period),
      REAL("max_sim_time", sim.max_sim_time),
      UINT("convergence_window", sim.convergence_window),
      REAL("convergence_delta", sim.convergence_delta),
      FLAG("stop_at_convergence", sim.stop_at_convergence),
      FLAG("shared_init", sim.shared_init),
      UINT("epochs_per_receipt", sim.epochs_per_receipt),
      UINT("initial_epochs", sim.initial_epochs),
      Key{"weighting_k",
          [](ExperimentConfig& c, std::string_view v) {
            c.sim.weighting_k = to_int<int>("weighting_k", v);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.sim.weighting_k); }},
      Key{"k_list",
          [](ExperimentConfig& c, std::string_view v) { c.sim.ks = to_int_list("k_list", v); },
          [](const ExperimentConfig& c) { return join(c.sim.ks); }},
      REAL("base_delay", sim.base_delay),
      REAL("upload_min", sim.upload_min),
      REAL("upload_max", sim.upload_max),
      REAL("meta_eps", sim.meta_eps),
      UINT("finetune_epochs", sim.finetune_epochs),
      REAL("fl_client_fraction", fl_client_fraction),
      UINT("fl_local_epochs", fl_local_epochs),
      UINT("fl_rounds", fl_rounds),
      UINT("threads", sim.threads),
      FLAG("trace", sim.trace),
  };
  return table;
}

#undef REAL
#undef UINT
#undef FLAG

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : key_table()) k.push_back(e.name);
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = key_table();
  const auto it =
      std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
  if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    it->set(cfg, trim(value));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("dataset: no path given");
  if (!(cfg.test_ratio > 0.0 && cfg.test_ratio < 0.5))
    throw ConfigError("test_ratio must lie in (0, 0.5)");
  if (cfg.density != DensitySubset::full && cfg.dataset_format == "prepared")
    throw ConfigError("density subsets need a raw dataset, not a prepared one");
  if (cfg.density_k < 2) throw ConfigError("density_k must be at least 2");
  if (cfg.sim.model.gmf.dim == 0 || cfg.sim.model.prmeg.dim == 0)
    throw ConfigError("embedding dimensions must be positive");
  try {
    SimConfig probe = cfg.sim;
    probe.model.num_items = 1;
    validate(probe);
    FlConfig fl = fl_config(cfg, probe.model);
    validate(fl);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  if (cfg.dataset_format == "prepared") return load_prepared(cfg.dataset);
  InteractionDataset ds = cfg.dataset_format == "checkins" ? load_checkins(cfg.dataset)
                                                           : load_movielens(cfg.dataset);
  if (cfg.min_item_users > 0 || cfg.min_user_items > 0)
    ds = filter_min_counts(ds, cfg.min_item_users, cfg.min_user_items);
  if (cfg.binarize) ds = binarize(ds);
  if (cfg.density != DensitySubset::full) {
    Rng rng(derive_seed(cfg.sim.seed, 0, 0xde45));
    auto parts = density_splits(ds, cfg.density_k, rng);
    ds = cfg.density == DensitySubset::dense ? std::move(parts.dense) : std::move(parts.sparse);
  }
  if (ds.records.empty()) throw DataError("no interactions left after filtering");
  SplitOptions opts;
  opts.test_ratio = cfg.test_ratio;
  opts.chronological = cfg.dataset_format == "checkins";
  opts.num_negatives = cfg.num_negatives;
  PreparedData out;
  out.splits = split_all(ds, opts, cfg.sim.seed);
  out.dataset = std::move(ds);
  return out;
}

ModelSpec model_spec(const ExperimentConfig& cfg, const InteractionDataset& ds) {
  ModelSpec spec = cfg.sim.model;
  spec.num_items = ds.num_items();
  spec.geo = ds.item_geo;
  return spec;
}

FlConfig fl_config(const ExperimentConfig& cfg, const ModelSpec& spec) {
  FlConfig fl;
  fl.model = spec;
  fl.client_fraction = cfg.fl_client_fraction;
  fl.local_epochs = cfg.fl_local_epochs;
  fl.total_rounds = cfg.fl_rounds;
  fl.meta_eps = cfg.sim.meta_eps;
  fl.finetune_epochs = cfg.sim.finetune_epochs;
  fl.ks = cfg.sim.ks;
  fl.weighting_k = cfg.sim.weighting_k;
  fl.seed = cfg.sim.seed;
  fl.threads = cfg.sim.threads;
  return fl;
}

RunReport run_experiment(const ExperimentConfig& cfg, const PreparedData& data) {
  const auto spec = model_spec(cfg, data.dataset);
  if (cfg.mode == RunMode::federated) {
    const auto fl = fl_config(cfg, spec);
    auto res = cfg.fl_algorithm == "reptile" ? reptile_run(fl, data.splits.nodes)
                                             : fl_run(fl, data.splits.nodes);
    return std::move(res.report);
  }
  SimConfig sim = cfg.sim;
  sim.model = spec;
  return run_simulation(sim, data.splits.nodes);
}

}  // namespace gossiprec
