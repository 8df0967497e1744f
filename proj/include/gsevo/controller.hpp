#pragma once

#include <array>
#include <vector>

#include "gsevo/search_space.hpp"

namespace gsevo {

using Action = std::array<double, 4>;  // [m1, m2, sigma1, sigma2] mapped into (0, 1)

inline constexpr double kActionFloor = 1e-6;
inline constexpr double kRewardEpsilon = 1e-8;

/// omega_p = (N + 1 - 2p) / Z with Z the sum of the positive numerators: zero-sum, strictly
/// decreasing, antisymmetric, positive part summing to 1.
std::vector<double> recombination_weights(std::size_t n);

/// Sum of relative improvements of the per-generation best fitness.
double cumulative_reward(const std::vector<double>& best_history);

struct WeightedStats {
  std::array<double, 2> mean{};    // [sum n_p w_p, sum meanwidth_p w_p]
  std::array<double, 2> spread{};  // [sum (nbar - n_p) w_p, sum (delta_p / 2) w_p]
};

/// `sorted` must be ordered best fitness first and match `weights` in length.
WeightedStats weighted_stats(const std::vector<Chromosome>& sorted, const std::vector<double>& weights);

/// Affine map from (0,1)^4 into sampler parameters over the search space.
SamplerParams action_to_sampler(const Action& a, const SearchSpace& space);

/// Inverse of action_to_sampler (not clamped). A zero-length range maps to 0.5.
Action sampler_to_action(const SamplerParams& p, const SearchSpace& space);

Action clamp_action(Action a);
double sigmoid(double x);
double logit(double a);

/// Sampler steering by a deterministic sigmoid policy a = sigmoid(theta).
///
/// Generations t <= 1 set the action straight from the normalized weighted statistics of the
/// fitness-sorted population. Later generations move theta along the Gaussian-score surrogate
///   grad = (s~ - a) * a * (1 - a)
/// scaled by alpha and the cumulative reward U, where s~ is the normalized statistic.
class PolicyController {
 public:
  struct State {
    Action theta{};
    Action action{0.5, 0.5, 0.5, 0.5};
    double alpha = 0.1;
    double last_reward = 0.0;
    Action last_target{};  // s~ from the most recent update
  };

  explicit PolicyController(SearchSpace space, double alpha = 0.1);

  /// Applies one update and returns the next sampler parameters.
  SamplerParams update(const std::vector<Chromosome>& sorted_population,
                       const std::vector<double>& best_history, int generation);

  const State& state() const noexcept { return state_; }
  void set_action(const Action& a);  // keeps theta = logit(a)

 private:
  SearchSpace space_;
  State state_;
};

}  // namespace gsevo
