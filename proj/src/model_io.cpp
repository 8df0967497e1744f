#include "gsevo/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gsevo {

namespace {

constexpr int kFormatVersion = 1;

std::string format_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_real(const std::string& token, const std::string& source) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw DataError(source + ": malformed number '" + token + "'");
  }
  return v;
}

void write_row(std::ostream& out, const char* key, const Eigen::RowVectorXd& v) {
  out << key;
  for (Eigen::Index j = 0; j < v.size(); ++j) out << ' ' << format_real(v(j));
  out << '\n';
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::istringstream line(const std::string& key) {
    std::string text;
    if (!std::getline(in_, text)) fail("missing '" + key + "' line");
    std::istringstream ls(text);
    std::string word;
    ls >> word;
    if (word != key) fail("expected '" + key + "', found '" + word + "'");
    return ls;
  }

  Eigen::RowVectorXd row(const std::string& key, Eigen::Index n) {
    auto ls = line(key);
    Eigen::RowVectorXd v(n);
    std::string tok;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(ls >> tok)) fail("'" + key + "' has fewer than " + std::to_string(n) + " values");
      v(j) = parse_real(tok, source_);
    }
    return v;
  }

  double next_real() {
    std::string tok;
    if (!(in_ >> tok)) fail("truncated parameter block");
    return parse_real(tok, source_);
  }

  [[noreturn]] void fail(const std::string& what) const { throw DataError(source_ + ": " + what); }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace

void write_model(std::ostream& out, const ModelBundle& bundle) {
  const auto& m = bundle.model;
  m.validate();
  out << "gsevo-model " << kFormatVersion << '\n';
  out << "activation " << to_string(m.activation) << '\n';
  out << "widths";
  for (int w : m.widths) out << ' ' << w;
  out << '\n';
  out << "input_transform " << to_string(bundle.input.kind) << '\n';
  if (bundle.input.kind != Normalization::none) {
    write_row(out, "offset", bundle.input.offset);
    write_row(out, "scale", bundle.input.scale);
  }
  const Vector<double> params = flatten(m);
  out << "parameters " << params.size() << '\n';
  for (Eigen::Index i = 0; i < params.size(); ++i) out << format_real(params(i)) << '\n';
}

ModelBundle read_model(std::istream& in, const std::string& source_name) {
  Reader r(in, source_name);
  ModelBundle bundle;
  {
    auto ls = r.line("gsevo-model");
    int version = 0;
    if (!(ls >> version) || version != kFormatVersion) {
      r.fail("unsupported model format version");
    }
  }
  {
    auto ls = r.line("activation");
    std::string name;
    ls >> name;
    try {
      bundle.model.activation = parse_activation(name);
    } catch (const ConfigError&) {
      r.fail("unknown activation '" + name + "'");
    }
  }
  {
    auto ls = r.line("widths");
    int w = 0;
    while (ls >> w) {
      if (w < 1) r.fail("widths must be positive");
      bundle.model.widths.push_back(w);
    }
    if (bundle.model.widths.size() < 2) r.fail("widths needs at least two entries");
  }
  {
    auto ls = r.line("input_transform");
    std::string name;
    ls >> name;
    try {
      bundle.input.kind = parse_normalization(name);
    } catch (const ConfigError&) {
      r.fail("unknown input transform '" + name + "'");
    }
    if (bundle.input.kind != Normalization::none) {
      bundle.input.offset = r.row("offset", bundle.model.widths.front());
      bundle.input.scale = r.row("scale", bundle.model.widths.front());
    }
  }
  auto& m = bundle.model;
  const auto layers = m.widths.size() - 1;
  m.weights.resize(layers);
  m.biases.resize(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    m.weights[k].resize(m.widths[k], m.widths[k + 1]);
    m.biases[k].resize(m.widths[k + 1]);
  }
  {
    auto ls = r.line("parameters");
    std::int64_t count = -1;
    ls >> count;
    if (count != m.parameter_count()) r.fail("parameter count does not match widths");
  }
  Vector<double> params(m.parameter_count());
  for (Eigen::Index i = 0; i < params.size(); ++i) params(i) = r.next_real();
  assign_parameters(m, params);
  return bundle;
}

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_model(out, bundle);
  if (!out) throw IoError("write failed for " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in, path.string());
}

}  // namespace gsevo
