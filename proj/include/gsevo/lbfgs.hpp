#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "gsevo/common.hpp"

namespace gsevo {

struct LbfgsConfig {
  int memory = 10;
  int max_iters = 200;
  double grad_tol = 1e-5;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_steps = 20;

  void validate() const {
    if (memory < 1) throw ConfigError("lbfgs memory must be >= 1");
    if (max_iters < 0) throw ConfigError("lbfgs max_iters must be >= 0");
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
      throw ConfigError("lbfgs requires 0 < c1 < c2 < 1");
    }
    if (max_line_search_steps < 1) throw ConfigError("lbfgs line search needs >= 1 step");
  }
};

enum class LbfgsStatus { converged, max_iterations, line_search_failed };

inline const char* to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

/// One accepted line-search step along direction d: phi(t) = f(x + t d).
template <typename Scalar>
struct LineSearchRecord {
  Scalar value0;  // phi(0)
  Scalar slope0;  // phi'(0)
  Scalar step;
  Scalar value;  // phi(step)
  Scalar slope;  // phi'(step)
};

template <typename Scalar>
struct LbfgsResult {
  Vector<Scalar> x;
  Scalar value{};
  std::vector<Scalar> trace;  // f(x0) followed by the value after each accepted step
  std::vector<LineSearchRecord<Scalar>> steps;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
};

/// Sliding window of curvature pairs (s, y). Pairs with s'y <= 1e-10 are rejected so the
/// implicit inverse Hessian stays positive definite.
template <typename Scalar>
class CurvatureHistory {
 public:
  static constexpr double kMinCurvature = 1e-10;

  explicit CurvatureHistory(std::size_t memory) : memory_(memory) {}

  bool push(Vector<Scalar> s, Vector<Scalar> y) {
    const Scalar sy = s.dot(y);
    if (!(sy > Scalar(kMinCurvature))) return false;
    if (pairs_.size() == memory_) pairs_.pop_front();
    pairs_.push_back({std::move(s), std::move(y), Scalar(1) / sy});
    return true;
  }

  void clear() { pairs_.clear(); }
  std::size_t size() const noexcept { return pairs_.size(); }
  Scalar curvature(std::size_t i) const { return Scalar(1) / pairs_[i].rho; }

  /// gamma = s'y / y'y of the newest pair; 1 when empty.
  Scalar initial_scaling() const {
    if (pairs_.empty()) return Scalar(1);
    const auto& p = pairs_.back();
    return p.s.dot(p.y) / p.y.squaredNorm();
  }

  /// Two-loop recursion: returns H g for the implicit inverse Hessian H.
  Vector<Scalar> apply_inverse_hessian(const Vector<Scalar>& g) const {
    Vector<Scalar> q = g;
    std::vector<Scalar> alpha(pairs_.size());
    for (std::size_t i = pairs_.size(); i-- > 0;) {
      alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
      q.noalias() -= alpha[i] * pairs_[i].y;
    }
    q *= initial_scaling();
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const Scalar beta = pairs_[i].rho * pairs_[i].y.dot(q);
      q.noalias() += (alpha[i] - beta) * pairs_[i].s;
    }
    return q;
  }

 private:
  struct Pair {
    Vector<Scalar> s;
    Vector<Scalar> y;
    Scalar rho;
  };
  std::size_t memory_;
  std::deque<Pair> pairs_;
};

namespace detail {

template <typename Scalar>
struct LinePoint {
  Scalar step;
  Scalar value;
  Scalar slope;
};

template <typename Scalar>
Scalar cubic_step(const LinePoint<Scalar>& a, const LinePoint<Scalar>& b) {
  const Scalar lo = std::min(a.step, b.step);
  const Scalar hi = std::max(a.step, b.step);
  const Scalar margin = Scalar(0.1) * (hi - lo);
  const Scalar mid = Scalar(0.5) * (lo + hi);
  if (!std::isfinite(a.value) || !std::isfinite(b.value) || !std::isfinite(a.slope) ||
      !std::isfinite(b.slope)) {
    return mid;
  }
  const Scalar d1 = a.slope + b.slope - Scalar(3) * (a.value - b.value) / (a.step - b.step);
  const Scalar disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0) return mid;
  const Scalar d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const Scalar denom = b.slope - a.slope + Scalar(2) * d2;
  if (denom == 0) return mid;
  const Scalar t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
  if (!std::isfinite(t)) return mid;
  return std::clamp(t, lo + margin, hi - margin);
}

}  // namespace detail

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing + cubic zoom).
///
/// `objective(x, grad)` returns f(x) and writes the gradient into `grad`. The result holds the
/// last accepted iterate; a line search that cannot satisfy the Wolfe conditions within its
/// evaluation budget stops the run with `line_search_failed` rather than throwing.
template <typename Scalar, typename Objective>
LbfgsResult<Scalar> minimize(Objective&& objective, Vector<Scalar> x0, const LbfgsConfig& cfg) {
  using Vec = Vector<Scalar>;
  using Point = detail::LinePoint<Scalar>;
  cfg.validate();

  LbfgsResult<Scalar> result;
  result.x = std::move(x0);
  Vec grad(result.x.size());
  result.value = objective(result.x, grad);
  if (!std::isfinite(result.value) || !grad.allFinite()) {
    throw Error("lbfgs: objective is not finite at the starting point");
  }
  result.trace.push_back(result.value);

  const auto c1 = static_cast<Scalar>(cfg.wolfe_c1);
  const auto c2 = static_cast<Scalar>(cfg.wolfe_c2);
  CurvatureHistory<Scalar> history(static_cast<std::size_t>(cfg.memory));
  Vec trial_x(result.x.size());
  Vec trial_grad(result.x.size());
  Vec best_x, best_grad;

  for (;;) {
    if (grad.norm() <= static_cast<Scalar>(cfg.grad_tol)) {
      result.status = LbfgsStatus::converged;
      return result;
    }
    if (result.iterations >= cfg.max_iters) {
      result.status = LbfgsStatus::max_iterations;
      return result;
    }

    Vec direction = -history.apply_inverse_hessian(grad);
    Scalar slope0 = grad.dot(direction);
    if (!(slope0 < 0)) {
      history.clear();
      direction = -grad;
      slope0 = -grad.squaredNorm();
    }
    Scalar step = result.iterations == 0 && history.size() == 0
                      ? std::min(Scalar(1), Scalar(1) / grad.norm())
                      : Scalar(1);

    const Scalar f0 = result.value;
    int evaluations = 0;
    auto eval = [&](Scalar t) {
      trial_x = result.x + t * direction;
      const Scalar v = objective(trial_x, trial_grad);
      ++evaluations;
      const bool finite = std::isfinite(v) && trial_grad.allFinite();
      return Point{t, finite ? v : std::numeric_limits<Scalar>::infinity(),
                   finite ? trial_grad.dot(direction) : std::numeric_limits<Scalar>::quiet_NaN()};
    };
    auto armijo_fails = [&](const Point& p) { return !(p.value <= f0 + c1 * p.step * slope0); };
    auto curvature_ok = [&](const Point& p) { return std::abs(p.slope) <= -c2 * slope0; };

    bool accepted = false;
    Point chosen{};
    auto accept = [&](const Point& p) {
      accepted = true;
      chosen = p;
      best_x = trial_x;
      best_grad = trial_grad;
    };
    auto zoom = [&](Point lo, Point hi) {
      while (evaluations < cfg.max_line_search_steps) {
        const Point p = eval(detail::cubic_step(lo, hi));
        if (armijo_fails(p) || p.value >= lo.value) {
          hi = p;
        } else {
          if (curvature_ok(p)) {
            accept(p);
            return;
          }
          if (p.slope * (hi.step - lo.step) >= 0) hi = lo;
          lo = p;
        }
        if (std::abs(hi.step - lo.step) <= std::numeric_limits<Scalar>::epsilon() * lo.step) return;
      }
    };

    Point prev{Scalar(0), f0, slope0};
    for (bool first = true; !accepted && evaluations < cfg.max_line_search_steps; first = false) {
      const Point p = eval(step);
      if (armijo_fails(p) || (!first && p.value >= prev.value)) {
        zoom(prev, p);
        break;
      }
      if (curvature_ok(p)) {
        accept(p);
        break;
      }
      if (p.slope >= 0) {
        zoom(p, prev);
        break;
      }
      prev = p;
      step *= Scalar(2);
    }

    if (!accepted) {
      result.status = LbfgsStatus::line_search_failed;
      return result;
    }

    result.steps.push_back({f0, slope0, chosen.step, chosen.value, chosen.slope});
    history.push(best_x - result.x, best_grad - grad);
    result.x.swap(best_x);
    grad.swap(best_grad);
    result.value = chosen.value;
    result.trace.push_back(result.value);
    ++result.iterations;
  }
}

}  // namespace gsevo
