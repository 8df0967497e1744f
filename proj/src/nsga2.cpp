#include "gsevo/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gsevo {

bool dominates(const FitnessPoint& p, const FitnessPoint& q) noexcept {
  const bool no_worse = p.accuracy >= q.accuracy && p.params <= q.params;
  const bool better = p.accuracy > q.accuracy || p.params < q.params;
  return no_worse && better;
}

std::vector<Front> non_dominated_sort(const std::vector<FitnessPoint>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominator_count(n, 0);
  std::vector<Front> fronts;
  Front current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(points[p], points[q])) {
        dominated[p].push_back(q);
      } else if (dominates(points[q], points[p])) {
        ++dominator_count[p];
      }
    }
    if (dominator_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    Front next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--dominator_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<FitnessPoint>& front_points) {
  const std::size_t n = front_points.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), inf);
    return distance;
  }
  auto accumulate = [&](auto value_of) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value_of(a) < value_of(b); });
    distance[order.front()] = inf;
    distance[order.back()] = inf;
    const double span = value_of(order.back()) - value_of(order.front());
    if (!(span > 0.0)) return;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      distance[order[i]] += (value_of(order[i + 1]) - value_of(order[i - 1])) / span;
    }
  };
  accumulate([&](std::size_t i) { return front_points[i].accuracy; });
  accumulate([&](std::size_t i) { return static_cast<double>(front_points[i].params); });
  return distance;
}

RankedPopulation rank_population(std::vector<Chromosome> members, std::vector<FitnessPoint> fitness) {
  if (members.size() != fitness.size()) {
    throw std::invalid_argument("rank_population: member and fitness counts differ");
  }
  RankedPopulation pop;
  pop.members = std::move(members);
  pop.fitness = std::move(fitness);
  pop.rank.assign(pop.members.size(), 0);
  pop.crowding.assign(pop.members.size(), 0.0);
  pop.fronts = non_dominated_sort(pop.fitness);
  for (std::size_t f = 0; f < pop.fronts.size(); ++f) {
    const auto& front = pop.fronts[f];
    std::vector<FitnessPoint> points;
    points.reserve(front.size());
    for (std::size_t i : front) points.push_back(pop.fitness[i]);
    const auto distance = crowding_distance(points);
    for (std::size_t k = 0; k < front.size(); ++k) {
      pop.rank[front[k]] = static_cast<int>(f) + 1;
      pop.crowding[front[k]] = distance[k];
    }
  }
  return pop;
}

std::size_t binary_tournament(const RankedPopulation& pop, Rng& rng) {
  if (pop.size() == 0) throw std::invalid_argument("binary_tournament: empty population");
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const std::size_t a = pick(rng);
  const std::size_t b = pick(rng);
  if (pop.rank[a] != pop.rank[b]) return pop.rank[a] < pop.rank[b] ? a : b;
  if (pop.crowding[a] != pop.crowding[b]) return pop.crowding[a] > pop.crowding[b] ? a : b;
  return std::bernoulli_distribution(0.5)(rng) ? a : b;
}

std::vector<Chromosome> select_parents(const RankedPopulation& pop, std::size_t count, Rng& rng) {
  std::vector<Chromosome> parents;
  parents.reserve(count);
  for (std::size_t i = 0; i < count; ++i) parents.push_back(pop.members[binary_tournament(pop, rng)]);
  return parents;
}

std::vector<std::size_t> select_survivors(const RankedPopulation& pop, std::size_t count) {
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  for (const auto& front : pop.fronts) {
    if (chosen.size() >= count) break;
    if (chosen.size() + front.size() <= count) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      continue;
    }
    Front by_distance = front;
    std::stable_sort(by_distance.begin(), by_distance.end(), [&](std::size_t a, std::size_t b) {
      return pop.crowding[a] > pop.crowding[b];
    });
    chosen.insert(chosen.end(), by_distance.begin(),
                  by_distance.begin() + static_cast<std::ptrdiff_t>(count - chosen.size()));
  }
  return chosen;
}

std::pair<Chromosome, Chromosome> spdc(const Chromosome& p1, const Chromosome& p2, int cut) {
  if (cut < 1 || cut >= std::min(p1.depth(), p2.depth())) {
    throw std::invalid_argument("spdc: cut point must satisfy 1 <= cut < min(depth)");
  }
  Chromosome c1, c2;
  c1.genes.assign(p1.genes.begin(), p1.genes.begin() + cut);
  c1.genes.insert(c1.genes.end(), p2.genes.begin() + cut, p2.genes.end());
  c2.genes.assign(p2.genes.begin(), p2.genes.begin() + cut);
  c2.genes.insert(c2.genes.end(), p1.genes.begin() + cut, p1.genes.end());
  return {std::move(c1), std::move(c2)};
}

double sbx_beta(double u, double eta) {
  const double exponent = 1.0 / (eta + 1.0);
  if (u <= 0.5) return std::pow(2.0 * u, exponent);
  return std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
}

std::pair<double, double> sbx_children(double g1, double g2, double beta) {
  return {0.5 * ((1.0 + beta) * g1 + (1.0 - beta) * g2),
          0.5 * ((1.0 - beta) * g1 + (1.0 + beta) * g2)};
}

std::pair<Chromosome, Chromosome> cdsbc(const Chromosome& c1, const Chromosome& c2,
                                        const CdsbcOptions& options, const SearchSpace& space,
                                        Rng& rng) {
  if (!(options.eta > 0.0)) throw std::invalid_argument("cdsbc: eta must be > 0");
  Chromosome out1 = c1, out2 = c2;
  const int common = std::min(c1.depth(), c2.depth());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int k = 0; k < common; ++k) {
    if (options.gene_probability < 1.0 && !(uniform(rng) < options.gene_probability)) continue;
    const double beta = sbx_beta(uniform(rng), options.eta);
    const auto [a, b] = sbx_children(c1.genes[k], c2.genes[k], beta);
    out1.genes[k] = round_clamp(a, space.width_min, space.width_max);
    out2.genes[k] = round_clamp(b, space.width_min, space.width_max);
  }
  return {std::move(out1), std::move(out2)};
}

namespace {

void mutate(Chromosome& c, const SamplerParams& sampler, const SearchSpace& space, Rng& rng) {
  if (c.genes.empty()) return;
  std::bernoulli_distribution hit(1.0 / static_cast<double>(c.genes.size()));
  const double step = sampler.sigma2 / 10.0;
  for (int& g : c.genes) {
    if (hit(rng)) g = round_clamp(g + step * standard_normal(rng), space.width_min, space.width_max);
  }
}

}  // namespace

std::vector<Chromosome> generate_offspring(const std::vector<Chromosome>& parents,
                                           const SamplerParams& sampler, const SearchSpace& space,
                                           const OffspringOptions& options, Rng& rng) {
  if (options.crossover_probability < 0.0 || options.crossover_probability > 1.0) {
    throw std::invalid_argument("crossover probability must lie in [0, 1]");
  }
  const std::size_t n = parents.size();
  std::vector<Chromosome> offspring = sample_population(sampler, space, n, rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto crossed = static_cast<std::size_t>(
      std::floor(options.crossover_probability * static_cast<double>(n) + 1e-9));
  order.resize(std::min(crossed, n));

  for (std::size_t i : order) {
    const Chromosome& p1 = parents[i];
    const Chromosome& p2 = offspring[i];
    const int common = std::min(p1.depth(), p2.depth());
    if (common < 2) continue;
    const int cut = std::uniform_int_distribution<int>(1, common - 1)(rng);
    auto [c1, c2] = spdc(p1, p2, cut);
    auto [d1, d2] = cdsbc(c1, c2, options.sbx, space, rng);
    offspring[i] = std::bernoulli_distribution(0.5)(rng) ? std::move(d1) : std::move(d2);
  }
  if (options.mutation) {
    for (auto& c : offspring) mutate(c, sampler, space, rng);
  }
  return offspring;
}

}  // namespace gsevo
