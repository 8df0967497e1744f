#include "gsevo/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace gsevo {

void SearchConfig::validate() const {
  space.validate();
  if (population < 2) throw ConfigError("population must be >= 2");
  if (offspring.crossover_probability < 0.0 || offspring.crossover_probability > 1.0) {
    throw ConfigError("crossover probability must lie in [0, 1]");
  }
  if (!(offspring.sbx.eta > 0.0)) throw ConfigError("eta must be > 0");
  if (offspring.sbx.gene_probability < 0.0 || offspring.sbx.gene_probability > 1.0) {
    throw ConfigError("gene crossover probability must lie in [0, 1]");
  }
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (max_generations < 0) throw ConfigError("max_generations must be >= 0");
  if (stagnation_window < 1) throw ConfigError("stagnation window must be >= 1");
  if (eval.full_iters < 0 || eval.fine_iters < 0) throw ConfigError("L-BFGS budgets must be >= 0");
  if (eval.pretrain_iters < 0) throw ConfigError("pretraining iterations must be >= 0");
  if (!(eval.noise >= 0.0)) throw ConfigError("noise must be >= 0");
  if (!(eval.init_scale > 0.0)) throw ConfigError("init scale must be > 0");
  eval.lbfgs.validate();
  const double sum = split.train + split.validation + split.test;
  if (split.train <= 0.0 || split.validation <= 0.0 || split.test < 0.0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be positive for train/validation and sum to 1");
  }
  if (data.segment_length < 1) throw ConfigError("segment length must be >= 1");
  if (data.synth_classes < 0 || (data.synth_classes > 0 && data.synth_classes < 2)) {
    throw ConfigError("synthetic data needs at least 2 classes");
  }
}

SearchConfig paper_preset() { return SearchConfig{}; }

SearchConfig desk_preset() {
  SearchConfig c;
  c.population = 10;
  c.max_generations = 10;
  c.space = {1, 4, 10, 64};
  return c;
}

SearchConfig preset(const std::string& name) {
  if (name == "paper") return paper_preset();
  if (name == "desk") return desk_preset();
  throw ConfigError("unknown preset '" + name + "' (expected desk|paper)");
}

PreparedData prepare_data(const Dataset& raw, const SearchConfig& config) {
  if (raw.num_classes < 2) throw DataError("classification needs at least 2 classes");
  Rng rng = make_stream(config.seed, "split");
  PreparedData out;
  out.split = stratified_split(raw, config.split, rng);
  out.raw_test = out.split.test;
  out.scaler = normalize_split(out.split, config.normalization);
  return out;
}

PreparedData prepare_data(const SearchConfig& config) {
  config.validate();
  const DataSource& src = config.data;
  Dataset raw;
  if (!src.csv.empty()) {
    raw = load_csv(src.csv, CsvOptions{src.csv_header});
  } else if (!src.signal_manifest.empty()) {
    raw = segment(load_signal_manifest(src.signal_manifest), src.segment_length);
  } else if (!src.signal_dir.empty()) {
    raw = segment(load_signal_directory(src.signal_dir), src.segment_length);
  } else if (src.synth_classes > 0) {
    Rng rng = make_stream(config.seed, "synth");
    raw = synth_blobs(src.synth_classes, src.synth_features, src.synth_per_class,
                      src.synth_separation, rng);
  } else {
    throw ConfigError("no data source configured (csv, signal manifest/directory, or synth)");
  }
  if (raw.empty()) throw DataError("data source produced no samples");
  return prepare_data(raw, config);
}

TerminationCheck check_termination(const std::vector<double>& best_history, int generation,
                                   int max_generations, double tolerance, int window) {
  if (!best_history.empty() && best_history.back() >= 1.0) {
    return {true, "perfect validation accuracy"};
  }
  const auto n = static_cast<int>(best_history.size());
  if (n > window) {
    bool flat = true;
    for (int k = 1; k <= window; ++k) {
      flat = flat && std::abs(best_history[n - 1] - best_history[n - 1 - k]) < tolerance;
    }
    if (flat) return {true, "stagnation " + std::to_string(window) + " generations"};
  }
  if (generation >= max_generations) return {true, "generation cap"};
  return {};
}

std::vector<double> SearchReport::best_history() const {
  std::vector<double> h;
  h.reserve(generations.size());
  for (const auto& g : generations) h.push_back(g.best.accuracy);
  return h;
}

namespace {

/// Indices ordered by fitness: accuracy descending, then parameter count ascending.
std::vector<std::size_t> fitness_order(const std::vector<FitnessPoint>& fitness) {
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fitness[a].accuracy != fitness[b].accuracy) return fitness[a].accuracy > fitness[b].accuracy;
    return fitness[a].params < fitness[b].params;
  });
  return order;
}

std::vector<Chromosome> sorted_members(const std::vector<Chromosome>& members,
                                       const std::vector<FitnessPoint>& fitness,
                                       const std::vector<std::size_t>& subset) {
  std::vector<FitnessPoint> f;
  for (std::size_t i : subset) f.push_back(fitness[i]);
  std::vector<Chromosome> out;
  for (std::size_t k : fitness_order(f)) out.push_back(members[subset[k]]);
  return out;
}

double mean_accuracy(const std::vector<FitnessPoint>& fitness) {
  double s = 0.0;
  for (const auto& f : fitness) s += f.accuracy;
  return fitness.empty() ? 0.0 : s / static_cast<double>(fitness.size());
}

/// The incumbent only gives way to a candidate that is at least as good.
bool replaces(const FitnessPoint& candidate, const FitnessPoint& incumbent) {
  const auto kc = accuracy_key(candidate.accuracy);
  const auto ki = accuracy_key(incumbent.accuracy);
  return kc > ki || (kc == ki && candidate.params <= incumbent.params);
}

}  // namespace

SearchReport run_search(const SearchConfig& config, const GenerationObserver& observer) {
  const PreparedData data = prepare_data(config);
  return run_search(config, data, observer);
}

SearchReport run_search(const SearchConfig& config, const PreparedData& data,
                        const GenerationObserver& observer) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  const Dataset& train = data.split.train;
  const Dataset& validation = data.split.validation;
  const std::size_t n = config.population;

  SearchReport report;
  report.raw_test = data.raw_test;
  auto emit = [&](GenerationRecord record) {
    record.elapsed_seconds = elapsed();
    report.generations.push_back(std::move(record));
    if (observer) observer(report.generations.back());
  };

  PolicyController controller(config.space, config.alpha);
  SamplerParams sampler = init_sampler_params(config.space);
  controller.set_action(clamp_action(sampler_to_action(sampler, config.space)));

  // Generation 0: guided sample, random init + full training.
  Rng init_rng = make_stream(config.seed, "population");
  std::vector<Chromosome> current = sample_population(sampler, config.space, n, init_rng);
  EvaluationResult eval = evaluate_population(current, nullptr, train, validation, config.eval,
                                              derive_seed(config.seed, "evaluate", 0));
  DnnModel<double> incumbent = eval.best;
  FitnessPoint incumbent_fitness = eval.fitness[eval.best_index];
  std::vector<double> best_history{incumbent_fitness.accuracy};

  RankedPopulation ranked = rank_population(current, eval.fitness);
  Rng tournament_rng = make_stream(config.seed, "tournament", 0);
  std::vector<std::size_t> parent_index;
  for (std::size_t i = 0; i < n; ++i) parent_index.push_back(binary_tournament(ranked, tournament_rng));
  std::vector<Chromosome> parents;
  for (std::size_t i : parent_index) parents.push_back(current[i]);

  if (config.controller) {
    sampler = controller.update(sorted_members(current, eval.fitness, parent_index), best_history, 0);
  }
  Rng offspring_rng = make_stream(config.seed, "offspring", 0);
  std::vector<Chromosome> offspring =
      generate_offspring(parents, sampler, config.space, config.offspring, offspring_rng);

  {
    GenerationRecord rec;
    rec.generation = 0;
    rec.population = current;
    rec.fitness = eval.fitness;
    rec.fronts = ranked.fronts;
    rec.selected = parent_index;
    rec.controller = controller.state();
    rec.sampler = sampler;
    rec.best_architecture = incumbent.architecture();
    rec.best = incumbent_fitness;
    rec.generation_best = eval.fitness[eval.best_index];
    rec.mean_accuracy = mean_accuracy(eval.fitness);
    emit(std::move(rec));
  }

  TerminationCheck term = check_termination(best_history, 0, config.max_generations,
                                            config.stagnation_tolerance, config.stagnation_window);
  for (int t = 1; !term.stop; ++t) {
    // Double-sized mating pool: surviving parents plus offspring.
    std::vector<Chromosome> pool = parents;
    pool.insert(pool.end(), offspring.begin(), offspring.end());
    eval = evaluate_population(pool, &incumbent, train, validation, config.eval,
                               derive_seed(config.seed, "evaluate", static_cast<std::uint64_t>(t)));
    const FitnessPoint generation_best = eval.fitness[eval.best_index];
    if (replaces(generation_best, incumbent_fitness)) {
      incumbent = std::move(eval.best);
      incumbent_fitness = generation_best;
    }
    best_history.push_back(incumbent_fitness.accuracy);

    ranked = rank_population(pool, eval.fitness);
    const std::vector<std::size_t> survivors = select_survivors(ranked, n);
    parents.clear();
    for (std::size_t i : survivors) parents.push_back(pool[i]);

    if (config.controller) {
      std::vector<std::size_t> all(pool.size());
      std::iota(all.begin(), all.end(), 0);
      sampler = controller.update(sorted_members(pool, eval.fitness, all), best_history, t);
    }
    offspring_rng = make_stream(config.seed, "offspring", static_cast<std::uint64_t>(t));
    offspring = generate_offspring(parents, sampler, config.space, config.offspring, offspring_rng);

    GenerationRecord rec;
    rec.generation = t;
    rec.population = std::move(pool);
    rec.fitness = eval.fitness;
    rec.fronts = ranked.fronts;
    rec.selected = survivors;
    rec.controller = controller.state();
    rec.sampler = sampler;
    rec.best_architecture = incumbent.architecture();
    rec.best = incumbent_fitness;
    rec.generation_best = generation_best;
    rec.mean_accuracy = mean_accuracy(eval.fitness);
    emit(std::move(rec));

    term = check_termination(best_history, t, config.max_generations, config.stagnation_tolerance,
                             config.stagnation_window);
  }

  report.termination_reason = term.reason;
  report.best = {std::move(incumbent), data.scaler};
  report.best_fitness = incumbent_fitness;
  if (!data.split.test.empty()) {
    report.test_accuracy = accuracy(report.best.model, data.split.test);
    report.confusion = confusion_matrix(report.best.model, data.split.test);
  } else {
    report.confusion = Eigen::MatrixXi::Zero(train.num_classes, train.num_classes);
  }
  report.wall_seconds = elapsed();
  return report;
}

}  // namespace gsevo
