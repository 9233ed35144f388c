#pragma once

#include <span>
#include <vector>

#include "gossiprec/geo.hpp"
#include "gossiprec/param_vector.hpp"
#include "gossiprec/rng.hpp"

// Personalized ranking metric embedding with geographical weighting.
//
// Distance D(u, s, c) = f(dist(s, c)) * [ w * |X_s - X_c|^2 + (1 - w) * |U_u - P_c|^2 ]
// where X is the sequential-transition space and (U, P) the preference
// space. Lower D means c is a more likely next visit after s. The spatial
// factor f is 1 within tau km and dist / tau beyond it.
namespace gossiprec::prmeg {

inline constexpr const char* kSeqSegment = "seq_embeddings";
inline constexpr const char* kPrefSegment = "pref_loc_embeddings";
inline constexpr const char* kMixSegment = "weight_w";

struct Config {
  std::size_t dim = 32;
  double mix_weight = 0.2;  ///< w, fixed during training
  double lr = 0.005;        ///< gamma
  double lambda = 0.03;
  double tau_km = 1.0;
  double init_scale = 0.01;
};

ParamVector make_params(std::size_t num_locations, const Config& cfg, Rng& rng);
std::vector<double> make_user(const Config& cfg, Rng& rng);

std::size_t num_locations(const ParamVector& shared, std::size_t dim);

double spatial_factor(double geo_dist_km, double tau_km) noexcept;

/// D(u, prev, cand) for a given prev->cand distance. Throws std::domain_error
/// on invalid ids or negative distance.
double score(const ParamVector& shared, std::span<const double> user, ItemId prev,
             ItemId cand, double geo_dist_km, double tau_km);

/// One observed transition prev -> next.
struct Transition {
  ItemId prev = 0;
  ItemId next = 0;

  auto operator<=>(const Transition&) const = default;
};

/// Gradient of log sigmoid(z), z = D(neg) - D(pos), for each touched row.
struct PairGradient {
  std::vector<double> seq_prev, seq_pos, seq_neg;
  std::vector<double> user, pref_pos, pref_neg;
  double objective = 0.0;  ///< log sigmoid(z)
};

/// Objective and analytic gradient for a fixed (prev, pos, neg) triple.
PairGradient pair_gradient(const ParamVector& shared, std::span<const double> user,
                           ItemId prev, ItemId pos, ItemId neg, double dist_pos_km,
                           double dist_neg_km, double tau_km);

/// Training context of one user: geography plus the next-locations observed
/// after every prev, so negatives can avoid them.
struct TransitionIndex {
  std::vector<Transition> sorted;  ///< unique, ordered by (prev, next)

  explicit TransitionIndex(std::span<const Transition> observed);
  bool observed(ItemId prev, ItemId next) const noexcept;
  std::size_t count_from(ItemId prev) const noexcept;
};

/// Ascent step Theta += gamma * (dlog sigma(z)/dTheta - 2 lambda Theta) on all
/// touched rows, with a sampled negative. Returns false (nothing changed)
/// when no unobserved negative exists for prev.
bool update(ParamVector& shared, std::span<double> user, Transition obs,
            const TransitionIndex& index, std::span<const GeoPoint> geo, const Config& cfg,
            Rng& rng);

struct EpochResult {
  std::size_t steps = 0;
  std::size_t skipped_observations = 0;
  bool skipped = false;  ///< no transitions at all
};

/// Shuffled pass over all transitions. Increments model.age.
EpochResult train_epoch(GossipModel& model, std::span<double> user,
                        std::span<const Transition> transitions, const TransitionIndex& index,
                        std::span<const GeoPoint> geo, const Config& cfg, Rng& rng);

/// Higher-is-better ranking scores (-D) for candidates after `prev`.
void score_candidates(const ParamVector& shared, std::span<const double> user, ItemId prev,
                      std::span<const ItemId> cands, std::span<const GeoPoint> geo,
                      double tau_km, std::span<double> out);

}  // namespace gossiprec::prmeg
