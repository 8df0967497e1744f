#include "gsevo/fitness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "gsevo/net2net.hpp"

namespace gsevo {

std::int64_t accuracy_key(double accuracy) { return std::llround(accuracy * 1e4); }

std::size_t select_best(const std::vector<FitnessPoint>& fitness) {
  if (fitness.empty()) throw Error("select_best: empty population");
  std::size_t best = 0;
  for (std::size_t i = 1; i < fitness.size(); ++i) {
    const auto key_i = accuracy_key(fitness[i].accuracy);
    const auto key_b = accuracy_key(fitness[best].accuracy);
    if (key_i > key_b || (key_i == key_b && fitness[i].params < fitness[best].params)) best = i;
  }
  return best;
}

std::pair<DnnModel<double>, MemberResult> evaluate_member(const Chromosome& c,
                                                          const DnnModel<double>* incumbent,
                                                          const Dataset& train,
                                                          const Dataset& validation,
                                                          const EvalConfig& cfg, std::uint64_t seed) {
  Rng rng = make_stream(seed, "member", hash_value(c));
  const int n_f = static_cast<int>(train.features());
  const int n_c = train.num_classes;
  DnnModel<double> model;
  LbfgsConfig lbfgs = cfg.lbfgs;
  if (incumbent == nullptr) {
    model = random_init<double>(c, n_f, n_c, cfg.init_scale, rng, cfg.activation);
    model = pretrain_sae(std::move(model), train.X, cfg.pretrain_iters, rng);
    lbfgs.max_iters = cfg.full_iters;
  } else {
    model = transform_to(*incumbent, c, n_f, n_c, cfg.noise, rng);
    lbfgs.max_iters = cfg.fine_iters;
  }
  const auto trained = train_model(model, train.X, train.y, lbfgs);
  MemberResult result;
  result.status = trained.status;
  result.iterations = trained.iterations;
  result.train_loss = trained.value;
  result.fitness = {accuracy(model, validation), param_count(c, n_f, n_c)};
  return {std::move(model), result};
}

EvaluationResult evaluate_population(const std::vector<Chromosome>& population,
                                     const DnnModel<double>* incumbent, const Dataset& train,
                                     const Dataset& validation, const EvalConfig& cfg,
                                     std::uint64_t seed) {
  if (population.empty()) throw Error("evaluate_population: empty population");
  if (train.features() != validation.features() || train.num_classes != validation.num_classes) {
    throw DataError("training and validation sets differ in features or classes");
  }
  if (train.empty() || validation.empty()) throw DataError("empty training or validation set");
  if (incumbent && (incumbent->inputs() != train.features() ||
                    incumbent->classes() != train.num_classes)) {
    throw DataError("incumbent model does not match the dataset shape");
  }

  // Duplicate gene sequences are evaluated once.
  std::map<Chromosome, std::size_t> slot_of;
  std::vector<std::size_t> member_slot(population.size());
  std::vector<const Chromosome*> unique;
  for (std::size_t i = 0; i < population.size(); ++i) {
    auto [it, inserted] = slot_of.emplace(population[i], unique.size());
    if (inserted) unique.push_back(&population[i]);
    member_slot[i] = it->second;
  }

  std::vector<DnnModel<double>> models(unique.size());
  std::vector<MemberResult> results(unique.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < unique.size(); k = next++) {
      try {
        auto [model, result] = evaluate_member(*unique[k], incumbent, train, validation, cfg, seed);
        models[k] = std::move(model);
        results[k] = result;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, unique.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EvaluationResult out;
  out.fitness.reserve(population.size());
  out.members.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    out.members.push_back(results[member_slot[i]]);
    out.fitness.push_back(results[member_slot[i]].fitness);
  }
  out.best_index = select_best(out.fitness);
  out.best = models[member_slot[out.best_index]];
  return out;
}

}  // namespace gsevo
