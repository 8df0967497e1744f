#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "gsevo/model.hpp"

namespace gsevo {

namespace detail {

template <typename Scalar>
void check_hidden_index(const DnnModel<Scalar>& m, int layer) {
  if (layer < 0 || layer >= m.hidden_layers()) {
    throw Error("hidden layer index " + std::to_string(layer) + " out of range (model has " +
                std::to_string(m.hidden_layers()) + ")");
  }
}

}  // namespace detail

/// Grows hidden layer `layer` (0-based) to `new_width` units. Each new unit copies the incoming
/// weights and bias of a uniformly chosen existing unit; the outgoing rows of every replication
/// group are divided by the group size so the next layer sees the same pre-activations. With
/// `noise` > 0, uniform(-noise, noise) is added to the copied incoming weights.
template <typename Scalar>
DnnModel<Scalar> widen(const DnnModel<Scalar>& m, int layer, int new_width, Scalar noise, Rng& rng) {
  detail::check_hidden_index(m, layer);
  const int old_width = m.widths[layer + 1];
  if (new_width < old_width) {
    throw Error("widen: new width " + std::to_string(new_width) + " is below current width " +
                std::to_string(old_width) + " (use shrink)");
  }
  if (new_width == old_width) return m;

  std::vector<int> source(static_cast<std::size_t>(new_width));
  std::iota(source.begin(), source.begin() + old_width, 0);
  std::uniform_int_distribution<int> pick(0, old_width - 1);
  for (int j = old_width; j < new_width; ++j) source[j] = pick(rng);
  std::vector<int> group(static_cast<std::size_t>(old_width), 0);
  for (int s : source) ++group[s];

  const Matrix<Scalar>& w_in = m.weights[layer];
  const Vector<Scalar>& b_in = m.biases[layer];
  const Matrix<Scalar>& w_out = m.weights[layer + 1];

  DnnModel<Scalar> out = m;
  Matrix<Scalar>& new_in = out.weights[layer];
  Vector<Scalar>& new_b = out.biases[layer];
  Matrix<Scalar>& new_out = out.weights[layer + 1];
  new_in.resize(w_in.rows(), new_width);
  new_b.resize(new_width);
  new_out.resize(new_width, w_out.cols());

  std::uniform_real_distribution<Scalar> jitter(-noise, noise);
  for (int j = 0; j < new_width; ++j) {
    const int s = source[j];
    new_in.col(j) = w_in.col(s);
    if (j >= old_width && noise > Scalar(0)) {
      for (Eigen::Index i = 0; i < new_in.rows(); ++i) new_in(i, j) += jitter(rng);
    }
    new_b(j) = b_in(s);
    new_out.row(j) = w_out.row(s) / static_cast<Scalar>(group[s]);
  }
  out.widths[layer + 1] = new_width;
  return out;
}

/// Inserts an identity layer (zero bias) so it becomes hidden layer `position`
/// (0 <= position <= hidden_layers). Its width equals the preceding layer's width. The insert is
/// exact for rectifier models whenever the preceding activations are non-negative, which always
/// holds past the first hidden layer. Sigmoid models change their function; they are accepted
/// only with `allow_approximate`.
template <typename Scalar>
DnnModel<Scalar> deepen(const DnnModel<Scalar>& m, int position, bool allow_approximate = false) {
  if (position < 0 || position > m.hidden_layers()) {
    throw Error("deepen position " + std::to_string(position) + " out of range");
  }
  if (m.activation != Activation::rectifier && !allow_approximate) {
    throw Error("deepen is only function-preserving for rectifier models; pass allow_approximate");
  }
  const int width = m.widths[position];
  DnnModel<Scalar> out = m;
  out.widths.insert(out.widths.begin() + position + 1, width);
  out.weights.insert(out.weights.begin() + position, Matrix<Scalar>::Identity(width, width));
  out.biases.insert(out.biases.begin() + position, Vector<Scalar>::Zero(width));
  return out;
}

/// Narrows hidden layer `layer` to the `new_width` units whose outgoing weight rows have the
/// largest L2 norm (ties keep the lower index). Surviving units keep their original order.
template <typename Scalar>
DnnModel<Scalar> shrink(const DnnModel<Scalar>& m, int layer, int new_width) {
  detail::check_hidden_index(m, layer);
  const int old_width = m.widths[layer + 1];
  if (new_width < 1 || new_width > old_width) {
    throw Error("shrink: new width must lie in [1, " + std::to_string(old_width) + "]");
  }
  if (new_width == old_width) return m;

  const Vector<Scalar> norms = m.weights[layer + 1].rowwise().norm();
  std::vector<int> order(static_cast<std::size_t>(old_width));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return norms(a) > norms(b); });
  order.resize(static_cast<std::size_t>(new_width));
  std::sort(order.begin(), order.end());

  DnnModel<Scalar> out = m;
  Matrix<Scalar>& new_in = out.weights[layer];
  Vector<Scalar>& new_b = out.biases[layer];
  Matrix<Scalar>& new_out = out.weights[layer + 1];
  new_in.resize(m.weights[layer].rows(), new_width);
  new_b.resize(new_width);
  new_out.resize(new_width, m.weights[layer + 1].cols());
  for (int j = 0; j < new_width; ++j) {
    new_in.col(j) = m.weights[layer].col(order[j]);
    new_b(j) = m.biases[layer](order[j]);
    new_out.row(j) = m.weights[layer + 1].row(order[j]);
  }
  out.widths[layer + 1] = new_width;
  return out;
}

/// Morphs `source` into the architecture `target`.
///
/// Depth first: a deeper target gets identity layers appended to the end of the hidden stack;
/// a shallower target keeps the first hidden layers and receives a freshly initialized output
/// layer. Then every hidden layer is widened (with `noise`) or shrunk to its target gene.
/// Widen/deepen-only morphs of rectifier models leave the network function unchanged.
template <typename Scalar>
DnnModel<Scalar> transform_to(const DnnModel<Scalar>& source, const Chromosome& target, Scalar noise,
                              Rng& rng) {
  if (target.depth() < 1) throw Error("transform_to: target needs at least one hidden layer");
  if (source.hidden_layers() < 1) throw Error("transform_to: source has no hidden layer");
  DnnModel<Scalar> m = source;
  while (m.hidden_layers() < target.depth()) {
    m = deepen(m, m.hidden_layers(), /*allow_approximate=*/true);
  }
  if (m.hidden_layers() > target.depth()) {
    const int keep = target.depth();
    m.widths.erase(m.widths.begin() + keep + 1, m.widths.end() - 1);
    m.weights.resize(static_cast<std::size_t>(keep) + 1);
    m.biases.resize(static_cast<std::size_t>(keep) + 1);
    init_layer(m.weights[keep], m.biases[keep], m.widths[keep], m.classes(), Scalar(1), rng);
  }
  for (int k = 0; k < target.depth(); ++k) {
    const int want = target.genes[k];
    if (want > m.widths[k + 1]) {
      m = widen(m, k, want, noise, rng);
    } else if (want < m.widths[k + 1]) {
      m = shrink(m, k, want);
    }
  }
  return m;
}

/// As above, after checking that `source` maps n_features inputs to n_classes outputs.
template <typename Scalar>
DnnModel<Scalar> transform_to(const DnnModel<Scalar>& source, const Chromosome& target,
                              int n_features, int n_classes, Scalar noise, Rng& rng) {
  if (source.inputs() != n_features || source.classes() != n_classes) {
    throw DataError("transform_to: source model is " + std::to_string(source.inputs()) + "->" +
                    std::to_string(source.classes()) + " but the task is " +
                    std::to_string(n_features) + "->" + std::to_string(n_classes));
  }
  return transform_to(source, target, noise, rng);
}

}  // namespace gsevo
