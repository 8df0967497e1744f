#include "gsevo/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsevo {

void SearchSpace::validate() const {
  if (depth_min < 1 || width_min < 1) {
    throw ConfigError("search space bounds must be strictly positive");
  }
  if (depth_min > depth_max) {
    throw ConfigError("search space: depth_min exceeds depth_max");
  }
  if (width_min > width_max) {
    throw ConfigError("search space: width_min exceeds width_max");
  }
}

double Chromosome::mean_width() const {
  if (genes.empty()) return 0.0;
  return std::accumulate(genes.begin(), genes.end(), 0.0) / static_cast<double>(genes.size());
}

int Chromosome::width_spread() const {
  if (genes.empty()) return 0;
  auto [lo, hi] = std::minmax_element(genes.begin(), genes.end());
  return *hi - *lo;
}

bool Chromosome::valid_in(const SearchSpace& space) const {
  if (depth() < space.depth_min || depth() > space.depth_max) return false;
  return std::all_of(genes.begin(), genes.end(), [&](int g) {
    return g >= space.width_min && g <= space.width_max;
  });
}

std::string Chromosome::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(genes[i]);
  }
  return out;
}

std::uint64_t hash_value(const Chromosome& c) noexcept {
  std::uint64_t h = mix64(c.genes.size());
  for (int g : c.genes) h = mix64(h ^ static_cast<std::uint64_t>(g));
  return h;
}

SamplerParams init_sampler_params(const SearchSpace& space) {
  const double n_r = space.depth_max;
  const double h_r = space.width_max;
  return {(1.0 + n_r) / 2.0, (1.0 + h_r) / 2.0, (n_r - 1.0) / 2.0, (h_r - 1.0) / 2.0};
}

int round_clamp(double value, int lo, int hi) {
  // std::round is half-away-from-zero.
  const double r = std::round(value);
  if (!(r >= lo)) return lo;  // also catches NaN
  if (r > hi) return hi;
  return static_cast<int>(r);
}

double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

std::vector<Chromosome> sample_population(const SamplerParams& params, const SearchSpace& space,
                                          std::size_t count, Rng& rng) {
  std::vector<int> depths(count);
  for (auto& d : depths) {
    d = gene_from_draw(params.m1, params.sigma1, standard_normal(rng), space.depth_min,
                       space.depth_max);
  }
  std::vector<Chromosome> pop;
  pop.reserve(count);
  for (int d : depths) {
    std::vector<int> genes(static_cast<std::size_t>(d));
    for (auto& g : genes) {
      g = gene_from_draw(params.m2, params.sigma2, standard_normal(rng), space.width_min,
                         space.width_max);
    }
    pop.emplace_back(std::move(genes));
  }
  return pop;
}

std::int64_t param_count(const Chromosome& c, int n_features, int n_classes) {
  std::int64_t total = 0;
  std::int64_t in = n_features;
  for (int g : c.genes) {
    total += in * g + g;
    in = g;
  }
  total += in * n_classes + n_classes;
  return total;
}

}  // namespace gsevo
