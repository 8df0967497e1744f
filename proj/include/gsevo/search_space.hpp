#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsevo/common.hpp"

namespace gsevo {

/// Bounds on network depth (hidden-layer count) and per-layer width.
struct SearchSpace {
  int depth_min = 1;
  int depth_max = 10;
  int width_min = 10;
  int width_max = 400;

  /// Throws ConfigError when a bound is non-positive or min > max.
  void validate() const;
};

/// Variable-length genome: one gene per hidden layer, gene value = layer width.
struct Chromosome {
  std::vector<int> genes;

  Chromosome() = default;
  explicit Chromosome(std::vector<int> g) : genes(std::move(g)) {}

  int depth() const noexcept { return static_cast<int>(genes.size()); }
  double mean_width() const;
  int width_spread() const;  // max gene - min gene

  bool valid_in(const SearchSpace& space) const;
  std::string to_string() const;  // "64-32-16"

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
  friend auto operator<=>(const Chromosome&, const Chromosome&) = default;
};

std::uint64_t hash_value(const Chromosome& c) noexcept;

/// Gaussian sampling parameters for depth (index 0) and width (index 1).
struct SamplerParams {
  double m1 = 0.0;
  double m2 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

SamplerParams init_sampler_params(const SearchSpace& space);

/// Round half away from zero, then clamp into [lo, hi].
int round_clamp(double value, int lo, int hi);

/// Integer produced from a standard-normal draw z: round_clamp(mean + sd * z).
inline int gene_from_draw(double mean, double sd, double z, int lo, int hi) {
  return round_clamp(mean + sd * z, lo, hi);
}

double standard_normal(Rng& rng);

std::vector<Chromosome> sample_population(const SamplerParams& params, const SearchSpace& space,
                                          std::size_t count, Rng& rng);

/// Weight plus bias count of the dense network [n_features, genes..., n_classes].
std::int64_t param_count(const Chromosome& c, int n_features, int n_classes);

}  // namespace gsevo
