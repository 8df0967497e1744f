#include "gsevo/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gsevo {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_real(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

std::string format_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() != y.size()) {
    throw DataError("dataset has " + std::to_string(X.rows()) + " rows but " +
                    std::to_string(y.size()) + " labels");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < 1 || y(i) > num_classes) {
      throw DataError("label " + std::to_string(y(i)) + " outside 1.." +
                      std::to_string(num_classes));
    }
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  return out;
}

Dataset segment(const RawSignal& signal, int window, int num_classes) {
  if (window < 1) throw DataError("segment length must be >= 1");
  const auto n = static_cast<Eigen::Index>(signal.samples.size()) / window;
  Dataset d;
  d.num_classes = num_classes;
  d.X.resize(n, window);
  d.y.setConstant(n, signal.label);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.X.row(r) = Eigen::Map<const Eigen::RowVectorXd>(signal.samples.data() + r * window, window);
  }
  return d;
}

Dataset segment(const std::vector<RawSignal>& signals, int window) {
  int num_classes = 0;
  for (const auto& s : signals) num_classes = std::max(num_classes, s.label);
  std::vector<Dataset> parts;
  Eigen::Index total = 0;
  for (const auto& s : signals) {
    parts.push_back(segment(s, window, num_classes));
    total += parts.back().rows();
  }
  Dataset d;
  d.num_classes = num_classes;
  d.X.resize(total, window);
  d.y.resize(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    d.X.middleRows(at, p.rows()) = p.X;
    d.y.segment(at, p.rows()) = p.y;
    at += p.rows();
  }
  return d;
}

Normalization parse_normalization(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "minmax") return Normalization::minmax;
  if (name == "zscore") return Normalization::zscore;
  throw ConfigError("unknown normalization '" + name + "' (expected none|minmax|zscore)");
}

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::minmax: return "minmax";
    case Normalization::zscore: return "zscore";
  }
  return "none";
}

ColumnScaler fit_scaler(const Matrix<double>& X, Normalization kind) {
  switch (kind) {
    case Normalization::minmax: return fit_minmax(X);
    case Normalization::zscore: return fit_zscore(X);
    case Normalization::none: break;
  }
  return ColumnScaler{};
}

ColumnScaler normalize_split(DataSplit& split, Normalization kind) {
  ColumnScaler scaler = fit_scaler(split.train.X, kind);
  split.train.X = scaler.apply(split.train.X);
  split.validation.X = scaler.apply(split.validation.X);
  split.test.X = scaler.apply(split.test.X);
  return scaler;
}

std::array<Eigen::Index, 3> apportion(Eigen::Index n, const SplitFractions& fractions) {
  const std::array<double, 3> f{fractions.train, fractions.validation, fractions.test};
  std::array<Eigen::Index, 3> counts{};
  std::array<double, 3> remainder{};
  Eigen::Index assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = f[k] * static_cast<double>(n);
    counts[k] = static_cast<Eigen::Index>(std::floor(exact + 1e-9));
    remainder[k] = std::max(0.0, exact - static_cast<double>(counts[k]));
    assigned += counts[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % 3) {
    if (f[order[i]] <= 0.0) continue;
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

DataSplit stratified_split(const Dataset& d, const SplitFractions& fractions, Rng& rng) {
  const double sum = fractions.train + fractions.validation + fractions.test;
  if (fractions.train < 0 || fractions.validation < 0 || fractions.test < 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  d.validate();
  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(d.num_classes));
  for (Eigen::Index i = 0; i < d.rows(); ++i) by_class[static_cast<std::size_t>(d.y(i) - 1)].push_back(i);

  std::array<std::vector<Eigen::Index>, 3> parts;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    if (rows.size() < 3) {
      throw DataError("insufficient class support: class " + std::to_string(c + 1) + " has " +
                      std::to_string(rows.size()) + " samples");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto counts = apportion(static_cast<Eigen::Index>(rows.size()), fractions);
    auto it = rows.begin();
    for (std::size_t k = 0; k < 3; ++k) {
      parts[k].insert(parts[k].end(), it, it + counts[k]);
      it += counts[k];
    }
  }
  return {d.subset(parts[0]), d.subset(parts[1]), d.subset(parts[2])};
}

Dataset parse_csv(std::istream& in, const std::string& source_name, const CsvOptions& options) {
  std::vector<std::vector<double>> features;
  std::vector<long> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && options.skip_header) continue;
    if (trim(line).empty()) continue;
    row.clear();
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_real(rest.substr(0, comma), v)) {
        throw DataError(source_name + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                        std::string(trim(rest.substr(0, comma))) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (row.size() < 2) {
      throw DataError(source_name + ":" + std::to_string(line_no) +
                      ": expected at least one feature and a label");
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields, found " + std::to_string(row.size()));
    }
    const double label = row.back();
    if (label != std::floor(label) || label < 0) {
      throw DataError(source_name + ":" + std::to_string(line_no) +
                      ": label must be a non-negative integer");
    }
    labels.push_back(static_cast<long>(label));
    row.pop_back();
    features.push_back(row);
  }
  if (features.empty()) throw DataError(source_name + ": empty file");

  const bool zero_based = *std::min_element(labels.begin(), labels.end()) == 0;
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(width - 1));
  d.y.resize(static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.X.row(r) = Eigen::Map<const Eigen::RowVectorXd>(features[i].data(), d.X.cols());
    d.y(r) = static_cast<int>(labels[i] + (zero_based ? 1 : 0));
  }
  d.num_classes = d.y.maxCoeff();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in, path.string(), options);
}

void write_csv(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.features(); ++j) out << format_real(d.X(i, j)) << ',';
    out << d.y(i) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

RawSignal load_signal(const std::filesystem::path& path, int label) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  RawSignal s;
  s.label = label;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    double v = 0.0;
    if (!parse_real(line, v)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric sample");
    }
    s.samples.push_back(v);
  }
  if (s.samples.empty()) throw DataError(path.string() + ": empty signal");
  return s;
}

std::vector<RawSignal> load_signal_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open " + manifest.string());
  std::vector<RawSignal> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.rfind(',');
    double label = 0.0;
    if (comma == std::string_view::npos || !parse_real(text.substr(comma + 1), label) ||
        label < 1 || label != std::floor(label)) {
      throw DataError(manifest.string() + ":" + std::to_string(line_no) +
                      ": expected 'path,label' with label >= 1");
    }
    std::filesystem::path p{std::string(trim(text.substr(0, comma)))};
    if (p.is_relative()) p = manifest.parent_path() / p;
    out.push_back(load_signal(p, static_cast<int>(label)));
  }
  if (out.empty()) throw DataError(manifest.string() + ": manifest lists no signals");
  return out;
}

std::vector<RawSignal> load_signal_directory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  std::vector<fs::path> classes;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) classes.push_back(e.path());
  }
  std::sort(classes.begin(), classes.end());
  std::vector<RawSignal> out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(classes[c])) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_signal(f, static_cast<int>(c + 1)));
  }
  if (out.empty()) throw DataError(root.string() + ": no signal files found");
  return out;
}

Dataset synth_blobs(int num_classes, int num_features, int per_class, double separation, Rng& rng) {
  if (num_classes < 2) throw ConfigError("synth_blobs needs at least 2 classes");
  if (num_features < 1 || per_class < 1) throw ConfigError("synth_blobs needs positive sizes");
  Dataset d;
  d.num_classes = num_classes;
  d.X.resize(static_cast<Eigen::Index>(num_classes) * per_class, num_features);
  d.y.resize(d.X.rows());
  std::normal_distribution<double> noise(0.0, 1.0);
  const double radius = separation / std::sqrt(2.0);
  Eigen::Index r = 0;
  for (int k = 0; k < num_classes; ++k) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(num_features);
    mean(k % num_features) = radius * (1.0 + static_cast<double>(k / num_features));
    for (int i = 0; i < per_class; ++i, ++r) {
      for (int j = 0; j < num_features; ++j) d.X(r, j) = mean(j) + noise(rng);
      d.y(r) = k + 1;
    }
  }
  return d;
}

}  // namespace gsevo
