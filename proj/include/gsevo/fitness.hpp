#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsevo/data.hpp"
#include "gsevo/lbfgs.hpp"
#include "gsevo/model.hpp"
#include "gsevo/nsga2.hpp"

namespace gsevo {

struct EvalConfig {
  int full_iters = 200;   // generation 0, from random weights
  int fine_iters = 30;    // later generations, warm-started from the incumbent
  double noise = 1e-4;    // symmetry-breaking noise on widened units
  double init_scale = 1.0;
  int pretrain_iters = 0;  // greedy autoencoder pretraining before full training
  Activation activation = Activation::rectifier;
  LbfgsConfig lbfgs;       // max_iters is overridden by the budgets above
  unsigned threads = 1;    // 0 = hardware concurrency
};

struct MemberResult {
  FitnessPoint fitness;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
  double train_loss = 0.0;
};

struct EvaluationResult {
  std::vector<FitnessPoint> fitness;
  std::vector<MemberResult> members;
  std::size_t best_index = 0;
  DnnModel<double> best;
};

/// Highest accuracy (compared at 4 decimals), then fewest parameters, then lowest index.
std::size_t select_best(const std::vector<FitnessPoint>& fitness);

/// Accuracy rounded to 4 decimals as an integer key.
std::int64_t accuracy_key(double accuracy);

/// Trains (no incumbent) or warm-starts (incumbent given) one model per chromosome and scores it
/// on the validation split. Member randomness comes from derive_seed(seed, "member", hash(genes)),
/// so duplicate chromosomes share one evaluation and results do not depend on thread count.
EvaluationResult evaluate_population(const std::vector<Chromosome>& population,
                                     const DnnModel<double>* incumbent, const Dataset& train,
                                     const Dataset& validation, const EvalConfig& cfg,
                                     std::uint64_t seed);

/// One member: the model after training and its result.
std::pair<DnnModel<double>, MemberResult> evaluate_member(const Chromosome& c,
                                                          const DnnModel<double>* incumbent,
                                                          const Dataset& train,
                                                          const Dataset& validation,
                                                          const EvalConfig& cfg, std::uint64_t seed);

}  // namespace gsevo
