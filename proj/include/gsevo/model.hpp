#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsevo/common.hpp"
#include "gsevo/data.hpp"
#include "gsevo/lbfgs.hpp"
#include "gsevo/search_space.hpp"

namespace gsevo {

enum class Activation { rectifier, sigmoid };

inline const char* to_string(Activation a) {
  return a == Activation::rectifier ? "rectifier" : "sigmoid";
}

inline Activation parse_activation(const std::string& name) {
  if (name == "rectifier" || name == "relu") return Activation::rectifier;
  if (name == "sigmoid" || name == "logistic") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + name + "' (expected rectifier|sigmoid)");
}

/// Dense feed-forward classifier: hidden layers with a shared activation, softmax output.
///
/// Layer k maps `widths[k]` inputs to `widths[k+1]` outputs through `weights[k]`
/// (widths[k] x widths[k+1]) and `biases[k]`. Samples are rows, so a layer computes
/// act(A * W + 1 b').
template <typename Scalar>
struct DnnModel {
  std::vector<int> widths;
  std::vector<Matrix<Scalar>> weights;
  std::vector<Vector<Scalar>> biases;
  Activation activation = Activation::rectifier;

  int inputs() const { return widths.front(); }
  int classes() const { return widths.back(); }
  int hidden_layers() const { return static_cast<int>(widths.size()) - 2; }
  int layers() const { return static_cast<int>(weights.size()); }

  Chromosome architecture() const {
    return Chromosome(std::vector<int>(widths.begin() + 1, widths.end() - 1));
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) n += weights[k].size() + biases[k].size();
    return n;
  }

  void validate() const {
    if (widths.size() < 2) throw Error("model needs at least input and output widths");
    if (weights.size() != widths.size() - 1 || biases.size() != weights.size()) {
      throw Error("model layer count does not match widths");
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k].rows() != widths[k] || weights[k].cols() != widths[k + 1] ||
          biases[k].size() != widths[k + 1]) {
        throw Error("model layer " + std::to_string(k) + " shape does not chain with widths");
      }
    }
  }

  friend bool operator==(const DnnModel& a, const DnnModel& b) {
    if (a.widths != b.widths || a.activation != b.activation) return false;
    for (std::size_t k = 0; k < a.weights.size(); ++k) {
      if (a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) return false;
    }
    return true;
  }
};

template <typename Derived>
auto activate(const Eigen::MatrixBase<Derived>& z, Activation act) {
  using Scalar = typename Derived::Scalar;
  using Out = Matrix<Scalar>;
  if (act == Activation::rectifier) return Out(z.cwiseMax(Scalar(0)));
  return Out((Scalar(1) + (-z.array()).exp()).inverse().matrix());
}

/// Derivative of the activation written in terms of pre-activation z and output a.
template <typename Scalar>
Matrix<Scalar> activation_derivative(const Matrix<Scalar>& z, const Matrix<Scalar>& a,
                                     Activation act) {
  if (act == Activation::rectifier) return (z.array() > Scalar(0)).template cast<Scalar>().matrix();
  return (a.array() * (Scalar(1) - a.array())).matrix();
}

/// Glorot-uniform weights scaled by `scale`, zero biases.
template <typename Scalar>
void init_layer(Matrix<Scalar>& W, Vector<Scalar>& b, int in, int out, Scalar scale, Rng& rng) {
  const Scalar limit = scale * std::sqrt(Scalar(6) / static_cast<Scalar>(in + out));
  std::uniform_real_distribution<Scalar> dist(-limit, limit);
  W.resize(in, out);
  // Row-major fill so the draw order matches the canonical flattening.
  for (int i = 0; i < in; ++i)
    for (int j = 0; j < out; ++j) W(i, j) = dist(rng);
  b = Vector<Scalar>::Zero(out);
}

template <typename Scalar = double>
DnnModel<Scalar> random_init(const Chromosome& c, int n_features, int n_classes, Scalar scale,
                             Rng& rng, Activation act = Activation::rectifier) {
  if (!(scale > 0)) throw ConfigError("init scale must be > 0");
  if (n_features < 1 || n_classes < 1) throw ConfigError("model needs positive input and class counts");
  DnnModel<Scalar> m;
  m.activation = act;
  m.widths.push_back(n_features);
  m.widths.insert(m.widths.end(), c.genes.begin(), c.genes.end());
  m.widths.push_back(n_classes);
  m.weights.resize(m.widths.size() - 1);
  m.biases.resize(m.widths.size() - 1);
  for (std::size_t k = 0; k + 1 < m.widths.size(); ++k) {
    init_layer(m.weights[k], m.biases[k], m.widths[k], m.widths[k + 1], scale, rng);
  }
  return m;
}

template <typename Scalar>
struct ForwardCache {
  std::vector<Matrix<Scalar>> pre;   // pre[k] = A_k W_k + b_k, one per layer
  std::vector<Matrix<Scalar>> post;  // post[0] = X, post[k+1] = act(pre[k]); last holds logits
};

template <typename Scalar>
void check_input(const DnnModel<Scalar>& m, Eigen::Index cols) {
  if (cols != m.inputs()) {
    throw DataError("input has " + std::to_string(cols) + " features, model expects " +
                    std::to_string(m.inputs()));
  }
}

template <typename Scalar, typename Derived>
ForwardCache<Scalar> forward_cache(const DnnModel<Scalar>& m, const Eigen::MatrixBase<Derived>& X) {
  check_input(m, X.cols());
  ForwardCache<Scalar> cache;
  cache.post.reserve(m.weights.size() + 1);
  cache.pre.reserve(m.weights.size());
  cache.post.emplace_back(X);
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    Matrix<Scalar> z(X.rows(), m.weights[k].cols());
    z.noalias() = cache.post.back() * m.weights[k];
    z.rowwise() += m.biases[k].transpose();
    const bool output = k + 1 == m.weights.size();
    cache.post.push_back(output ? z : activate(z, m.activation));
    cache.pre.push_back(std::move(z));
  }
  return cache;
}

/// Output-layer scores before the softmax.
template <typename Scalar, typename Derived>
Matrix<Scalar> logits(const DnnModel<Scalar>& m, const Eigen::MatrixBase<Derived>& X) {
  check_input(m, X.cols());
  Matrix<Scalar> a = X;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    Matrix<Scalar> z(a.rows(), m.weights[k].cols());
    z.noalias() = a * m.weights[k];
    z.rowwise() += m.biases[k].transpose();
    a = k + 1 == m.weights.size() ? std::move(z) : activate(z, m.activation);
  }
  return a;
}

template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& z) {
  Matrix<Scalar> p = (z.colwise() - z.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

/// Class probabilities, one row per sample.
template <typename Scalar, typename Derived>
Matrix<Scalar> forward(const DnnModel<Scalar>& m, const Eigen::MatrixBase<Derived>& X) {
  return softmax_rows(logits(m, X));
}

/// Canonical layout: layers in order, each W row-major followed by its bias.
template <typename Scalar>
Vector<Scalar> flatten(const DnnModel<Scalar>& m) {
  Vector<Scalar> out(m.parameter_count());
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    const auto& W = m.weights[k];
    Eigen::Map<RowMajorMatrix<Scalar>>(out.data() + at, W.rows(), W.cols()) = W;
    at += W.size();
    out.segment(at, m.biases[k].size()) = m.biases[k];
    at += m.biases[k].size();
  }
  return out;
}

/// Writes `params` (canonical layout) into `m`, whose shapes must already be set.
template <typename Scalar>
void assign_parameters(DnnModel<Scalar>& m, const Vector<Scalar>& params) {
  if (params.size() != m.parameter_count()) throw Error("parameter vector length mismatch");
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    auto& W = m.weights[k];
    W = Eigen::Map<const RowMajorMatrix<Scalar>>(params.data() + at, W.rows(), W.cols());
    at += W.size();
    m.biases[k] = params.segment(at, m.biases[k].size());
    at += m.biases[k].size();
  }
}

template <typename Scalar>
DnnModel<Scalar> unflatten(DnnModel<Scalar> shape, const Vector<Scalar>& params) {
  assign_parameters(shape, params);
  return shape;
}

template <typename Scalar>
void check_labels(const DnnModel<Scalar>& m, Eigen::Index rows, const Eigen::VectorXi& y) {
  if (y.size() != rows) throw DataError("label count does not match row count");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < 1 || y(i) > m.classes()) {
      throw DataError("label " + std::to_string(y(i)) + " outside 1.." + std::to_string(m.classes()));
    }
  }
}

/// Mean softmax cross-entropy and its gradient in canonical layout.
template <typename Scalar, typename Derived>
std::pair<Scalar, Vector<Scalar>> loss_and_grad(const DnnModel<Scalar>& m,
                                                const Eigen::MatrixBase<Derived>& X,
                                                const Eigen::VectorXi& y) {
  check_labels(m, X.rows(), y);
  auto cache = forward_cache(m, X);
  const auto n = static_cast<Scalar>(X.rows());
  Matrix<Scalar>& z = cache.post.back();
  const Vector<Scalar> zmax = z.rowwise().maxCoeff();
  Matrix<Scalar> p = (z.colwise() - zmax).array().exp().matrix();
  const Vector<Scalar> denom = p.rowwise().sum();
  Scalar loss = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    loss += zmax(i) + std::log(denom(i)) - z(i, y(i) - 1);
  }
  loss /= n;

  // delta = (P - Y) / n, propagated backwards.
  Matrix<Scalar> delta = p.array().colwise() / denom.array();
  for (Eigen::Index i = 0; i < z.rows(); ++i) delta(i, y(i) - 1) -= Scalar(1);
  delta /= n;

  Vector<Scalar> grad(m.parameter_count());
  std::vector<Eigen::Index> offsets(m.weights.size());
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    offsets[k] = at;
    at += m.weights[k].size() + m.biases[k].size();
  }
  for (std::size_t k = m.weights.size(); k-- > 0;) {
    const auto& W = m.weights[k];
    Eigen::Map<RowMajorMatrix<Scalar>> gW(grad.data() + offsets[k], W.rows(), W.cols());
    gW.noalias() = cache.post[k].transpose() * delta;
    grad.segment(offsets[k] + W.size(), W.cols()) = delta.colwise().sum().transpose();
    if (k == 0) break;
    Matrix<Scalar> upstream(delta.rows(), W.rows());
    upstream.noalias() = delta * W.transpose();
    delta = upstream.cwiseProduct(activation_derivative(cache.pre[k - 1], cache.post[k], m.activation));
  }
  return {loss, std::move(grad)};
}

template <typename Scalar, typename Derived>
Scalar loss(const DnnModel<Scalar>& m, const Eigen::MatrixBase<Derived>& X, const Eigen::VectorXi& y) {
  check_labels(m, X.rows(), y);
  const Matrix<Scalar> z = logits(m, X);
  Scalar total = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Scalar zmax = z.row(i).maxCoeff();
    total += zmax + std::log((z.row(i).array() - zmax).exp().sum()) - z(i, y(i) - 1);
  }
  return total / static_cast<Scalar>(z.rows());
}

/// 1-based predicted labels; argmax ties go to the lowest class index.
template <typename Scalar, typename Derived>
Eigen::VectorXi predict(const DnnModel<Scalar>& m, const Eigen::MatrixBase<Derived>& X) {
  const Matrix<Scalar> z = logits(m, X);
  Eigen::VectorXi out(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < z.cols(); ++j)
      if (z(i, j) > z(i, best)) best = j;
    out(i) = static_cast<int>(best) + 1;
  }
  return out;
}

template <typename Scalar>
double accuracy(const DnnModel<Scalar>& m, const Dataset& d) {
  if (d.empty()) throw DataError("empty evaluation set");
  const Eigen::VectorXi pred = predict(m, d.X.cast<Scalar>());
  return static_cast<double>((pred.array() == d.y.array()).count()) / static_cast<double>(d.rows());
}

/// counts(true - 1, predicted - 1)
template <typename Scalar>
Eigen::MatrixXi confusion_matrix(const DnnModel<Scalar>& m, const Dataset& d) {
  check_labels(m, d.rows(), d.y);
  const Eigen::VectorXi pred = predict(m, d.X.cast<Scalar>());
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(m.classes(), m.classes());
  for (Eigen::Index i = 0; i < pred.size(); ++i) ++counts(d.y(i) - 1, pred(i) - 1);
  return counts;
}

/// Trains `m` on (X, y) with L-BFGS from its current parameters.
template <typename Scalar>
LbfgsResult<Scalar> train_model(DnnModel<Scalar>& m, const Matrix<Scalar>& X, const Eigen::VectorXi& y,
                          const LbfgsConfig& cfg) {
  DnnModel<Scalar> work = m;
  auto objective = [&](const Vector<Scalar>& params, Vector<Scalar>& grad) {
    assign_parameters(work, params);
    auto [value, g] = loss_and_grad(work, X, y);
    grad = std::move(g);
    return value;
  };
  auto result = minimize<Scalar>(objective, flatten(m), cfg);
  assign_parameters(m, result.x);
  return result;
}

/// Reconstruction objective for one autoencoder: encoder (W, b) with the model's activation,
/// linear decoder (V, c), loss = ||act(A W + b) V + c - A||^2 / (2 n).
/// Parameter layout: W row-major, b, V row-major, c.
template <typename Scalar>
Scalar autoencoder_loss_and_grad(const Matrix<Scalar>& A, int hidden, Activation act,
                                 const Vector<Scalar>& params, Vector<Scalar>& grad) {
  const Eigen::Index in = A.cols();
  const Eigen::Index n = A.rows();
  Eigen::Index at = 0;
  Eigen::Map<const RowMajorMatrix<Scalar>> W(params.data(), in, hidden);
  at += in * hidden;
  const auto b = params.segment(at, hidden);
  at += hidden;
  Eigen::Map<const RowMajorMatrix<Scalar>> V(params.data() + at, hidden, in);
  at += hidden * in;
  const auto c = params.segment(at, in);

  Matrix<Scalar> z = A * W;
  z.rowwise() += b.transpose();
  const Matrix<Scalar> h = activate(z, act);
  Matrix<Scalar> r = h * V;
  r.rowwise() += c.transpose();
  r -= A;
  const Scalar value = r.squaredNorm() / (Scalar(2) * static_cast<Scalar>(n));
  r /= static_cast<Scalar>(n);

  grad.resize(params.size());
  at = 0;
  Eigen::Map<RowMajorMatrix<Scalar>> gW(grad.data(), in, hidden);
  at += in * hidden;
  const Eigen::Index b_at = at;
  at += hidden;
  Eigen::Map<RowMajorMatrix<Scalar>> gV(grad.data() + at, hidden, in);
  at += hidden * in;
  gV.noalias() = h.transpose() * r;
  grad.segment(at, in) = r.colwise().sum().transpose();
  const Matrix<Scalar> dz = (r * V.transpose()).cwiseProduct(activation_derivative(z, h, act));
  gW.noalias() = A.transpose() * dz;
  grad.segment(b_at, hidden) = dz.colwise().sum().transpose();
  return value;
}

/// Greedy layer-wise autoencoder pretraining of the hidden layers; `iterations` bounds the
/// L-BFGS run per layer and 0 leaves the model untouched. Decoders are discarded.
/// When `traces` is non-null it receives each layer's reconstruction-loss trace.
template <typename Scalar>
DnnModel<Scalar> pretrain_sae(DnnModel<Scalar> m, const Matrix<Scalar>& X, int iterations, Rng& rng,
                              std::vector<std::vector<Scalar>>* traces = nullptr) {
  if (iterations < 0) throw ConfigError("pretraining iterations must be >= 0");
  if (iterations == 0) return m;
  check_input(m, X.cols());
  LbfgsConfig cfg;
  cfg.max_iters = iterations;
  Matrix<Scalar> A = X;
  for (int k = 0; k < m.hidden_layers(); ++k) {
    const int in = m.widths[k];
    const int hidden = m.widths[k + 1];
    Matrix<Scalar> V;
    Vector<Scalar> c;
    init_layer(V, c, hidden, in, Scalar(1), rng);

    Vector<Scalar> params(2 * in * hidden + hidden + in);
    Eigen::Index at = 0;
    Eigen::Map<RowMajorMatrix<Scalar>>(params.data(), in, hidden) = m.weights[k];
    at += in * hidden;
    params.segment(at, hidden) = m.biases[k];
    at += hidden;
    Eigen::Map<RowMajorMatrix<Scalar>>(params.data() + at, hidden, in) = V;
    at += hidden * in;
    params.segment(at, in) = c;

    auto objective = [&](const Vector<Scalar>& p, Vector<Scalar>& g) {
      return autoencoder_loss_and_grad(A, hidden, m.activation, p, g);
    };
    auto result = minimize<Scalar>(objective, std::move(params), cfg);
    m.weights[k] = Eigen::Map<const RowMajorMatrix<Scalar>>(result.x.data(), in, hidden);
    m.biases[k] = result.x.segment(in * hidden, hidden);
    if (traces) traces->push_back(result.trace);

    Matrix<Scalar> z = A * m.weights[k];
    z.rowwise() += m.biases[k].transpose();
    A = activate(z, m.activation);
  }
  return m;
}

}  // namespace gsevo
