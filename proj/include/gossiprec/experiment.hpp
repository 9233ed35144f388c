#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gossiprec/baselines.hpp"
#include "gossiprec/data.hpp"
#include "gossiprec/simulator.hpp"

namespace gossiprec {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { gossip, federated };
enum class DensitySubset { full, dense, sparse };

/// Every knob of a run. Serialized as flat `key = value` lines; see
/// config_keys() for the full list.
struct ExperimentConfig {
  RunMode mode = RunMode::gossip;
  std::string fl_algorithm = "fedavg";  ///< fedavg | reptile

  std::string dataset;
  std::string dataset_format = "movielens";  ///< movielens | checkins | prepared
  DensitySubset density = DensitySubset::full;
  std::size_t density_k = 8;
  std::size_t min_item_users = 0;
  std::size_t min_user_items = 0;
  bool binarize = true;
  double test_ratio = 0.15;
  std::size_t num_negatives = 100;

  SimConfig sim;  ///< also carries the model hyperparameters, seed and cutoffs
  double fl_client_fraction = 0.1;
  std::size_t fl_local_epochs = 1;
  std::size_t fl_rounds = 400;
};

const std::vector<std::string>& config_keys();

/// Sets one key; throws ConfigError on an unknown key or bad value.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// `key = value` lines; blank lines and `#` comments are ignored.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Every key in config_keys() order; parse_config(serialize_config(c))
/// reproduces c exactly.
std::string serialize_config(const ExperimentConfig& cfg);

/// Checks cross-field constraints; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// Loads, filters and splits the configured dataset.
PreparedData prepare_data(const ExperimentConfig& cfg);

/// Model hyperparameters from the config, sized for `ds`.
ModelSpec model_spec(const ExperimentConfig& cfg, const InteractionDataset& ds);

FlConfig fl_config(const ExperimentConfig& cfg, const ModelSpec& spec);

/// Runs the configured protocol on prepared data.
RunReport run_experiment(const ExperimentConfig& cfg, const PreparedData& data);

}  // namespace gossiprec
