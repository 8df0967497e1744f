#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gsevo/search.hpp"

namespace gsevo {

namespace {

using nlohmann::json;

json genes_json(const Chromosome& c) { return c.genes; }

json action_json(const Action& a) { return json::array({a[0], a[1], a[2], a[3]}); }

json fitness_json(const FitnessPoint& f) { return json::array({f.accuracy, f.params}); }

}  // namespace

std::string to_json_line(const GenerationRecord& record) {
  json population = json::array();
  for (const auto& c : record.population) population.push_back(genes_json(c));
  json fitness = json::array();
  for (const auto& f : record.fitness) fitness.push_back(fitness_json(f));

  json j;
  j["generation"] = record.generation;
  j["population"] = std::move(population);
  j["fitness"] = std::move(fitness);
  j["fronts"] = record.fronts;
  j["selected"] = record.selected;
  j["controller"] = {{"theta", action_json(record.controller.theta)},
                     {"action", action_json(record.controller.action)},
                     {"target", action_json(record.controller.last_target)},
                     {"reward", record.controller.last_reward},
                     {"alpha", record.controller.alpha}};
  j["sampler"] = {{"m", {record.sampler.m1, record.sampler.m2}},
                  {"sigma", {record.sampler.sigma1, record.sampler.sigma2}}};
  j["best"] = {{"architecture", genes_json(record.best_architecture)},
               {"accuracy", record.best.accuracy},
               {"params", record.best.params}};
  j["generation_best"] = fitness_json(record.generation_best);
  j["mean_accuracy"] = record.mean_accuracy;
  j["elapsed_seconds"] = record.elapsed_seconds;
  return j.dump();
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : path_(path) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path_.string());
}

void RunLogWriter::append(const GenerationRecord& record) {
  std::ofstream out(path_, std::ios::app);
  out << to_json_line(record) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path_.string());
}

ReportFiles ReportFiles::in(const std::filesystem::path& dir) {
  return {dir / "run_log.jsonl", dir / "summary.csv", dir / "confusion_matrix.csv",
          dir / "best_model.txt", dir / "test_split.csv"};
}

void emit_report(const SearchReport& report, const ReportFiles& files) {
  auto open = [](const std::filesystem::path& p) {
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
  };

  {
    auto out = open(files.run_log);
    for (const auto& g : report.generations) out << to_json_line(g) << '\n';
  }
  {
    auto out = open(files.summary);
    out << "test_accuracy,validation_accuracy,architecture,param_count,generations,"
           "termination,wall_time_seconds\n";
    out << std::setprecision(6) << report.test_accuracy << ',' << report.best_fitness.accuracy << ','
        << report.best.model.architecture().to_string() << ',' << report.best_fitness.params << ','
        << report.generations.size() << ',' << report.termination_reason << ','
        << std::fixed << std::setprecision(3) << report.wall_seconds << '\n';
  }
  {
    auto out = open(files.confusion);
    out << "true\\predicted";
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) out << ',' << j + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
      out << i + 1;
      for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) out << ',' << report.confusion(i, j);
      out << '\n';
    }
  }
  if (!report.best.model.widths.empty()) save_model(files.model, report.best);
  if (!files.test_split.empty() && !report.raw_test.empty()) write_csv(files.test_split, report.raw_test);
}

}  // namespace gsevo
