// gsevo: guided-sampling evolutionary architecture search for dense classifiers.
//
//   gsevo search --config run.cfg --data train.csv [--seed S] [--out DIR] [--preset desk|paper]
//   gsevo eval   --model best_model.txt --data test.csv
//   gsevo synth  --classes C --features F --per-class K --separation SEP --out blobs.csv

#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "gsevo/search.hpp"

namespace {

using namespace gsevo;

template <typename T>
void apply(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

/// Every config-file key is also accepted as a --flag of the same name.
struct SearchOverrides {
  std::string preset = "desk";
  std::optional<std::string> data, signal_manifest, signal_dir, normalization, activation;
  std::optional<bool> csv_header, controller, mutation;
  std::optional<int> segment_length, synth_classes, synth_features, synth_per_class;
  std::optional<double> synth_separation;
  std::optional<double> train_fraction, validation_fraction, test_fraction;
  std::optional<int> depth_min, depth_max, width_min, width_max;
  std::optional<std::size_t> population;
  std::optional<double> crossover_probability, eta, gene_crossover_probability, alpha;
  std::optional<int> max_generations, stagnation_window;
  std::optional<double> stagnation_tolerance;
  std::optional<int> full_iters, fine_iters, pretrain_iters, lbfgs_memory;
  std::optional<double> noise, init_scale, grad_tol;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::string out = "gsevo_out";

  void bind(CLI::App& app) {
    app.add_option("--preset", preset, "Default set: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--data", data, "CSV dataset (last column = integer label)");
    app.add_option("--csv_header", csv_header, "Skip one header line in the CSV");
    app.add_option("--signal_manifest", signal_manifest, "Manifest of 'signal_path,label' lines");
    app.add_option("--signal_dir", signal_dir, "Directory with one subdirectory of signals per class");
    app.add_option("--segment_length", segment_length, "Window length for signal segmentation");
    app.add_option("--synth_classes", synth_classes, "Generate Gaussian blobs with this many classes");
    app.add_option("--synth_features", synth_features);
    app.add_option("--synth_per_class", synth_per_class);
    app.add_option("--synth_separation", synth_separation);
    app.add_option("--normalization", normalization, "none | minmax | zscore");
    app.add_option("--train_fraction", train_fraction);
    app.add_option("--validation_fraction", validation_fraction);
    app.add_option("--test_fraction", test_fraction);
    app.add_option("--depth_min", depth_min);
    app.add_option("--depth_max", depth_max);
    app.add_option("--width_min", width_min);
    app.add_option("--width_max", width_max);
    app.add_option("--population", population);
    app.add_option("--crossover_probability", crossover_probability);
    app.add_option("--eta", eta, "SBX distribution index");
    app.add_option("--gene_crossover_probability", gene_crossover_probability);
    app.add_option("--mutation", mutation, "Enable per-gene Gaussian mutation");
    app.add_option("--alpha", alpha, "Controller learning rate");
    app.add_option("--controller", controller, "false = fixed initial sampler");
    app.add_option("--max_generations", max_generations);
    app.add_option("--stagnation_tolerance", stagnation_tolerance);
    app.add_option("--stagnation_window", stagnation_window);
    app.add_option("--full_iters", full_iters, "L-BFGS iterations for generation 0");
    app.add_option("--fine_iters", fine_iters, "L-BFGS iterations for warm-started fine-tuning");
    app.add_option("--pretrain_iters", pretrain_iters, "Autoencoder pretraining iterations per layer");
    app.add_option("--lbfgs_memory", lbfgs_memory);
    app.add_option("--grad_tol", grad_tol);
    app.add_option("--noise", noise, "Symmetry-breaking noise on widened units");
    app.add_option("--init_scale", init_scale);
    app.add_option("--activation", activation, "rectifier | sigmoid");
    app.add_option("--threads", threads, "Evaluation threads (0 = all cores)");
    app.add_option("--seed", seed);
    app.add_option("--out", out, "Output directory");
  }

  SearchConfig build() const {
    SearchConfig c = gsevo::preset(preset);
    if (data) c.data.csv = *data;
    apply(csv_header, c.data.csv_header);
    if (signal_manifest) c.data.signal_manifest = *signal_manifest;
    if (signal_dir) c.data.signal_dir = *signal_dir;
    apply(segment_length, c.data.segment_length);
    apply(synth_classes, c.data.synth_classes);
    apply(synth_features, c.data.synth_features);
    apply(synth_per_class, c.data.synth_per_class);
    apply(synth_separation, c.data.synth_separation);
    if (normalization) c.normalization = parse_normalization(*normalization);
    apply(train_fraction, c.split.train);
    apply(validation_fraction, c.split.validation);
    apply(test_fraction, c.split.test);
    apply(depth_min, c.space.depth_min);
    apply(depth_max, c.space.depth_max);
    apply(width_min, c.space.width_min);
    apply(width_max, c.space.width_max);
    apply(population, c.population);
    apply(crossover_probability, c.offspring.crossover_probability);
    apply(eta, c.offspring.sbx.eta);
    apply(gene_crossover_probability, c.offspring.sbx.gene_probability);
    apply(mutation, c.offspring.mutation);
    apply(alpha, c.alpha);
    apply(controller, c.controller);
    apply(max_generations, c.max_generations);
    apply(stagnation_tolerance, c.stagnation_tolerance);
    apply(stagnation_window, c.stagnation_window);
    apply(full_iters, c.eval.full_iters);
    apply(fine_iters, c.eval.fine_iters);
    apply(pretrain_iters, c.eval.pretrain_iters);
    apply(lbfgs_memory, c.eval.lbfgs.memory);
    apply(grad_tol, c.eval.lbfgs.grad_tol);
    apply(noise, c.eval.noise);
    apply(init_scale, c.eval.init_scale);
    if (activation) c.eval.activation = parse_activation(*activation);
    apply(threads, c.eval.threads);
    apply(seed, c.seed);
    c.validate();
    if (c.data.empty()) throw ConfigError("no data: pass --data, a signal source, or synth_classes");
    return c;
  }
};

int run_search_command(const SearchOverrides& o) {
  const SearchConfig config = o.build();
  const PreparedData data = prepare_data(config);
  std::filesystem::create_directories(o.out);
  const ReportFiles files = ReportFiles::in(o.out);
  RunLogWriter log(files.run_log);
  std::cerr << "gsevo: " << data.split.train.rows() << " train / " << data.split.validation.rows()
            << " validation / " << data.split.test.rows() << " test rows, "
            << data.split.train.features() << " features, " << data.split.train.num_classes
            << " classes\n";
  const SearchReport report = run_search(config, data, [&](const GenerationRecord& g) {
    log.append(g);
    std::cerr << "generation " << g.generation << ": best " << g.best.accuracy << " ["
              << g.best_architecture.to_string() << ", " << g.best.params << " params], mean "
              << g.mean_accuracy << '\n';
  });
  emit_report(report, files);
  std::cout << "termination: " << report.termination_reason << '\n'
            << "best architecture: " << report.best.model.architecture().to_string() << " ("
            << report.best_fitness.params << " params)\n"
            << "validation accuracy: " << report.best_fitness.accuracy << '\n'
            << "test accuracy: " << report.test_accuracy << '\n'
            << "outputs: " << std::filesystem::path(o.out).string() << '\n';
  return 0;
}

int run_eval_command(const std::string& model_path, const std::string& data_path, bool header) {
  const ModelBundle bundle = load_model(model_path);
  Dataset d = load_csv(data_path, CsvOptions{header});
  if (d.features() != bundle.model.inputs()) {
    throw DataError("data has " + std::to_string(d.features()) + " features, model expects " +
                    std::to_string(bundle.model.inputs()));
  }
  d.num_classes = bundle.model.classes();
  d.validate();
  d.X = bundle.input.apply(d.X);
  const Eigen::MatrixXi cm = confusion_matrix(bundle.model, d);
  std::cout << "accuracy: " << accuracy(bundle.model, d) << '\n' << "confusion (rows = true):\n";
  for (Eigen::Index i = 0; i < cm.rows(); ++i) {
    for (Eigen::Index j = 0; j < cm.cols(); ++j) std::cout << (j ? " " : "") << cm(i, j);
    std::cout << '\n';
  }
  return 0;
}

/// Config files are flat `key = value` lists; every key belongs to the search subcommand.
class SearchConfigFile : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items)
      if (item.parents.empty()) item.parents = {"search"};
    return items;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided-sampling evolutionary architecture search for dense classifiers"};
  app.require_subcommand(1);

  SearchOverrides search_opts;
  auto* search = app.add_subcommand("search", "Run the architecture search");
  app.set_config("--config", "", "key = value configuration file (keys match the search flags)");
  app.config_formatter(std::make_shared<SearchConfigFile>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  search->fallthrough();
  search_opts.bind(*search);

  std::string model_path, eval_data;
  bool eval_header = false;
  auto* eval = app.add_subcommand("eval", "Score a saved model on a CSV dataset");
  eval->add_option("--model", model_path)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_flag("--csv_header", eval_header, "Skip one header line");

  int classes = 3, features = 20, per_class = 300;
  double separation = 6.0;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-blob CSV");
  synth->add_option("--classes", classes)->check(CLI::Range(2, 1 << 20));
  synth->add_option("--features", features)->check(CLI::PositiveNumber);
  synth->add_option("--per-class", per_class)->check(CLI::PositiveNumber);
  synth->add_option("--separation", separation);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) std::cerr << "config error: ";
    return app.exit(e);
  }

  try {
    if (*search) return run_search_command(search_opts);
    if (*eval) return run_eval_command(model_path, eval_data, eval_header);
    if (*synth) {
      Rng rng{synth_seed};
      write_csv(synth_out, synth_blobs(classes, features, per_class, separation, rng));
      return 0;
    }
  } catch (const gsevo::Error& e) {
    std::cerr << e.category() << " error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
