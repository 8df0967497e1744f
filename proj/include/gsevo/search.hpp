#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gsevo/controller.hpp"
#include "gsevo/data.hpp"
#include "gsevo/fitness.hpp"
#include "gsevo/model_io.hpp"
#include "gsevo/nsga2.hpp"
#include "gsevo/search_space.hpp"

namespace gsevo {

/// Where the samples come from. Exactly one source should be set; `csv` wins over the signal
/// sources, which win over the synthetic generator.
struct DataSource {
  std::filesystem::path csv;
  bool csv_header = false;
  std::filesystem::path signal_manifest;
  std::filesystem::path signal_dir;
  int segment_length = 200;
  int synth_classes = 0;  // > 0 enables the generator
  int synth_features = 20;
  int synth_per_class = 300;
  double synth_separation = 6.0;

  bool empty() const {
    return csv.empty() && signal_manifest.empty() && signal_dir.empty() && synth_classes == 0;
  }
};

struct SearchConfig {
  DataSource data;
  Normalization normalization = Normalization::minmax;
  SplitFractions split;
  SearchSpace space;
  std::size_t population = 100;
  OffspringOptions offspring;
  double alpha = 0.1;
  bool controller = true;  // false keeps the initial closed-form sampler for the whole run
  int max_generations = 50;
  double stagnation_tolerance = 1e-4;
  int stagnation_window = 3;
  EvalConfig eval;
  std::uint64_t seed = 1;

  /// Throws ConfigError on the first inconsistent setting.
  void validate() const;
};

/// Population 100, p_c 0.5, 50 generations, depth [1,10], width [10,400], alpha 0.1.
SearchConfig paper_preset();

/// Laptop-sized run: population 10, 10 generations, depth [1,4], width [10,64].
SearchConfig desk_preset();

SearchConfig preset(const std::string& name);

struct PreparedData {
  DataSplit split;  // normalized
  ColumnScaler scaler;
  Dataset raw_test;  // test rows before normalization
};

/// Load, split (stratified, seeded from `seed`), and normalize with training statistics.
PreparedData prepare_data(const SearchConfig& config);
PreparedData prepare_data(const Dataset& raw, const SearchConfig& config);

struct TerminationCheck {
  bool stop = false;
  std::string reason;
};

/// `best_history[t]` is the best validation accuracy after generation t.
TerminationCheck check_termination(const std::vector<double>& best_history, int generation,
                                   int max_generations, double tolerance = 1e-4, int window = 3);

struct GenerationRecord {
  int generation = 0;
  std::vector<Chromosome> population;  // the evaluated set (P0, then P_t U Q_t)
  std::vector<FitnessPoint> fitness;
  std::vector<Front> fronts;
  std::vector<std::size_t> selected;   // parents (generation 0) or survivors
  PolicyController::State controller;
  SamplerParams sampler;               // parameters used for the next offspring
  Chromosome best_architecture;        // incumbent after this generation
  FitnessPoint best;
  FitnessPoint generation_best;
  double mean_accuracy = 0.0;
  double elapsed_seconds = 0.0;
};

struct SearchReport {
  std::vector<GenerationRecord> generations;
  ModelBundle best;
  FitnessPoint best_fitness;
  double test_accuracy = 0.0;
  Eigen::MatrixXi confusion;
  std::string termination_reason;
  double wall_seconds = 0.0;
  Dataset raw_test;

  std::vector<double> best_history() const;
};

using GenerationObserver = std::function<void(const GenerationRecord&)>;

SearchReport run_search(const SearchConfig& config, const GenerationObserver& observer = {});
SearchReport run_search(const SearchConfig& config, const PreparedData& data,
                        const GenerationObserver& observer = {});

/// Appends one JSON object per generation, flushing after each line.
class RunLogWriter {
 public:
  explicit RunLogWriter(const std::filesystem::path& path);
  void append(const GenerationRecord& record);

 private:
  std::filesystem::path path_;
};

std::string to_json_line(const GenerationRecord& record);

struct ReportFiles {
  std::filesystem::path run_log;
  std::filesystem::path summary;
  std::filesystem::path confusion;
  std::filesystem::path model;
  std::filesystem::path test_split;

  static ReportFiles in(const std::filesystem::path& dir);
};

/// Writes the run log, summary CSV, confusion-matrix CSV, serialized model and raw test split.
void emit_report(const SearchReport& report, const ReportFiles& files);

}  // namespace gsevo
