#include "gsevo/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsevo {

std::vector<double> recombination_weights(std::size_t n) {
  if (n < 2) throw std::invalid_argument("recombination_weights needs N >= 2");
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t p = 1; p <= n; ++p) {
    const double numerator = static_cast<double>(n + 1) - 2.0 * static_cast<double>(p);
    w[p - 1] = numerator;
    if (numerator > 0) z += numerator;
  }
  for (double& v : w) v /= z;
  return w;
}

double cumulative_reward(const std::vector<double>& best_history) {
  double u = 0.0;
  for (std::size_t i = 1; i < best_history.size(); ++i) {
    u += (best_history[i] - best_history[i - 1]) / std::max(best_history[i - 1], kRewardEpsilon);
  }
  return u;
}

WeightedStats weighted_stats(const std::vector<Chromosome>& sorted, const std::vector<double>& weights) {
  if (sorted.size() != weights.size()) {
    throw std::invalid_argument("weighted_stats: population and weight counts differ");
  }
  double mean_depth = 0.0;
  for (const auto& c : sorted) mean_depth += c.depth();
  if (!sorted.empty()) mean_depth /= static_cast<double>(sorted.size());

  WeightedStats s;
  for (std::size_t p = 0; p < sorted.size(); ++p) {
    const auto& c = sorted[p];
    const double w = weights[p];
    s.mean[0] += c.depth() * w;
    s.mean[1] += c.mean_width() * w;
    s.spread[0] += (mean_depth - c.depth()) * w;
    s.spread[1] += (c.width_spread() / 2.0) * w;
  }
  return s;
}

SamplerParams action_to_sampler(const Action& a, const SearchSpace& space) {
  const double depth_range = space.depth_max - space.depth_min;
  const double width_range = space.width_max - space.width_min;
  return {space.depth_min + a[0] * depth_range, space.width_min + a[1] * width_range,
          a[2] * depth_range / 2.0, a[3] * width_range / 2.0};
}

Action sampler_to_action(const SamplerParams& p, const SearchSpace& space) {
  const double depth_range = space.depth_max - space.depth_min;
  const double width_range = space.width_max - space.width_min;
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.5; };
  return {ratio(p.m1 - space.depth_min, depth_range), ratio(p.m2 - space.width_min, width_range),
          ratio(2.0 * p.sigma1, depth_range), ratio(2.0 * p.sigma2, width_range)};
}

Action clamp_action(Action a) {
  for (double& v : a) {
    v = std::isnan(v) ? 0.5 : std::clamp(v, kActionFloor, 1.0 - kActionFloor);
  }
  return a;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double a) {
  a = std::clamp(a, kActionFloor, 1.0 - kActionFloor);
  return std::log(a / (1.0 - a));
}

PolicyController::PolicyController(SearchSpace space, double alpha) : space_(space) {
  space_.validate();
  state_.alpha = alpha;
}

void PolicyController::set_action(const Action& a) {
  const Action clamped = clamp_action(a);
  for (std::size_t j = 0; j < 4; ++j) {
    state_.theta[j] = logit(clamped[j]);
    state_.action[j] = clamped[j];
  }
}

SamplerParams PolicyController::update(const std::vector<Chromosome>& sorted_population,
                                       const std::vector<double>& best_history, int generation) {
  const auto weights = recombination_weights(sorted_population.size());
  const WeightedStats stats = weighted_stats(sorted_population, weights);
  const Action target = clamp_action(sampler_to_action(
      {stats.mean[0], stats.mean[1], stats.spread[0], stats.spread[1]}, space_));
  state_.last_target = target;

  if (generation <= 1) {
    state_.last_reward = 0.0;
    set_action(target);
    return action_to_sampler(state_.action, space_);
  }

  // theta is kept equal to logit(action) (to rounding), so the previous theta is reused.
  const double reward = cumulative_reward(best_history);
  state_.last_reward = reward;
  for (std::size_t j = 0; j < 4; ++j) {
    const double a = state_.action[j];
    const double step = state_.alpha * reward * (target[j] - a) * a * (1.0 - a);
    if (step == 0.0) continue;  // zero reward or s~ = a: exact fixed point
    state_.theta[j] += step;
    state_.action[j] = sigmoid(state_.theta[j]);
  }
  return action_to_sampler(state_.action, space_);
}

}  // namespace gsevo
