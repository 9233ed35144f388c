#pragma once

#include <span>
#include <vector>

#include "gossiprec/param_vector.hpp"
#include "gossiprec/rng.hpp"

// Generalized matrix factorization: sigma(h . (p_u * q_i) + b).
//
// The shared (gossiped) part is the item embedding table, h and b. The user
// row p_u lives with its owner and never leaves the node.
namespace gossiprec::gmf {

inline constexpr const char* kItemSegment = "item_embeddings";
inline constexpr const char* kWeightSegment = "output_weights";
inline constexpr const char* kBiasSegment = "output_bias";

struct Config {
  std::size_t dim = 16;
  int neg_ratio = 4;
  double lr = 0.1;
  double l2 = 0.001;
  /// Embeddings are drawn from uniform(-init_scale, init_scale).
  double init_scale = 0.01;
  /// h is drawn from uniform(-s, s), s = output_init_gain * sqrt(3 / dim).
  double output_init_gain = 1.0;
};

ParamVector make_params(std::size_t num_items, const Config& cfg, Rng& rng);
std::vector<double> make_user(const Config& cfg, Rng& rng);

std::size_t num_items(const ParamVector& shared, std::size_t dim);

/// h . (p_u * q_i) + b. Throws std::domain_error for an unknown item.
double logit(const ParamVector& shared, std::span<const double> user, ItemId item);
/// Probability of relevance in (0, 1).
double forward(const ParamVector& shared, std::span<const double> user, ItemId item);

/// Binary cross-entropy of one labelled example.
double example_loss(const ParamVector& shared, std::span<const double> user, ItemId item,
                    double label);

/// Gradient of example_loss with respect to every parameter it touches.
struct ExampleGradient {
  std::vector<double> user;
  std::vector<double> item;
  std::vector<double> weights;
  double bias = 0.0;
  double loss = 0.0;
};
ExampleGradient example_gradient(const ParamVector& shared, std::span<const double> user,
                                 ItemId item, double label);

/// Logits for many candidates at once; out.size() must equal items.size().
void score(const ParamVector& shared, std::span<const double> user,
           std::span<const ItemId> items, std::span<double> out);

struct EpochResult {
  double loss = 0.0;   ///< mean BCE over all steps taken
  std::size_t steps = 0;
  bool skipped = false;  ///< empty training set; nothing was done
};

/// One SGD pass: each positive (in shuffled order) followed by neg_ratio
/// uniformly drawn items outside `seen_sorted`. Increments model.age.
EpochResult train_epoch(GossipModel& model, std::span<double> user,
                        std::span<const ItemId> positives,
                        std::span<const ItemId> seen_sorted, const Config& cfg, Rng& rng);

}  // namespace gossiprec::gmf
