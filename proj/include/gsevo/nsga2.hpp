#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gsevo/search_space.hpp"

namespace gsevo {

/// Objective pair: validation accuracy (maximized) and parameter count (minimized).
struct FitnessPoint {
  double accuracy = 0.0;
  std::int64_t params = 0;

  friend bool operator==(const FitnessPoint&, const FitnessPoint&) = default;
};

/// p dominates q: no worse in both objectives, strictly better in at least one.
bool dominates(const FitnessPoint& p, const FitnessPoint& q) noexcept;

using Front = std::vector<std::size_t>;

/// Fast non-dominated sort. Fronts are listed best first; indices within a front ascend.
std::vector<Front> non_dominated_sort(const std::vector<FitnessPoint>& points);

/// Crowding distance of each point in one front (same order as the input).
/// Boundary points per objective are infinite; zero-span objectives contribute nothing.
std::vector<double> crowding_distance(const std::vector<FitnessPoint>& front_points);

struct RankedPopulation {
  std::vector<Chromosome> members;
  std::vector<FitnessPoint> fitness;
  std::vector<int> rank;          // 1 = first front
  std::vector<double> crowding;   // within the member's own front
  std::vector<Front> fronts;

  std::size_t size() const noexcept { return members.size(); }
};

RankedPopulation rank_population(std::vector<Chromosome> members, std::vector<FitnessPoint> fitness);

/// Two uniform draws (with replacement); lower rank wins, then larger crowding, then a fair coin.
std::size_t binary_tournament(const RankedPopulation& pop, Rng& rng);

/// Tournament winners, `count` of them.
std::vector<Chromosome> select_parents(const RankedPopulation& pop, std::size_t count, Rng& rng);

/// Elitist survivor indices: whole fronts in order, the splitting front by descending crowding
/// distance (stable on index).
std::vector<std::size_t> select_survivors(const RankedPopulation& pop, std::size_t count);

/// Single point depth crossover: swap the tails after the first `cut` genes.
/// Requires 1 <= cut < min(depth).
std::pair<Chromosome, Chromosome> spdc(const Chromosome& p1, const Chromosome& p2, int cut);

/// SBX spread factor for a uniform draw u in [0, 1).
double sbx_beta(double u, double eta);

/// Real-valued SBX children: 0.5[(1 +/- beta) g1 + (1 -/+ beta) g2].
std::pair<double, double> sbx_children(double g1, double g2, double beta);

struct CdsbcOptions {
  double eta = 15.0;
  double gene_probability = 1.0;
};

/// Common depth simulated binary crossover over the first min(depth) genes; children are rounded
/// and clamped into the width bounds.
std::pair<Chromosome, Chromosome> cdsbc(const Chromosome& c1, const Chromosome& c2,
                                        const CdsbcOptions& options, const SearchSpace& space,
                                        Rng& rng);

struct OffspringOptions {
  double crossover_probability = 0.5;
  CdsbcOptions sbx;
  bool mutation = false;  // per-gene Gaussian step, probability 1/depth, sd = sigma2 / 10
};

/// Guided samples Q (one per parent), with floor(p_c * N) distinct positions i crossed with
/// parent i; each crossed position keeps one of the two children at random.
std::vector<Chromosome> generate_offspring(const std::vector<Chromosome>& parents,
                                           const SamplerParams& sampler, const SearchSpace& space,
                                           const OffspringOptions& options, Rng& rng);

}  // namespace gsevo
