#include "dcshs/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace dcshs {

namespace {

constexpr int kIterations = 2000;

Vector signed_labels(const std::vector<Label>& y) {
  Vector s(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i)
    s(static_cast<Eigen::Index>(i)) = y[i] == Label::minority ? 1.0 : -1.0;
  return s;
}

}  // namespace

Vector BaseClassifier::decision(const Matrix& x) const {
  if (x.cols() != weights.size())
    throw std::invalid_argument("classifier: feature count mismatch");
  return (x * weights).array() + bias;
}

double hinge_objective(const Matrix& x, const std::vector<Label>& y,
                       const Vector& w, double b, double c) {
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    throw std::invalid_argument("classifier: label count mismatch");
  const Vector s = signed_labels(y);
  const Vector f = (x * w).array() + b;
  const Vector margins = s.cwiseProduct(f);
  const double hinge = (1.0 - margins.array()).cwiseMax(0.0).sum();
  return 0.5 * w.squaredNorm() + c * hinge;
}

BaseClassifier train_base(const Matrix& x, const std::vector<Label>& y,
                          double c) {
  if (x.rows() == 0) throw std::invalid_argument("classifier: empty input");
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    throw std::invalid_argument("classifier: label count mismatch");
  if (c <= 0.0)
    throw std::invalid_argument("classifier: penalty must be positive");

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  bool has_min = false;
  bool has_maj = false;
  for (Label l : y) (l == Label::minority ? has_min : has_maj) = true;
  if (!has_min || !has_maj) {
    BaseClassifier constant;
    constant.weights = Vector::Zero(d);
    constant.bias = has_min ? 1.0 : -1.0;
    constant.single_class = true;
    constant.objective = 0.0;
    return constant;
  }

  const Vector s = signed_labels(y);
  // Work on the per-sample average so the step schedule is size-free:
  // F(w, b) = 0.5*reg*||w||^2 + mean_i max(0, 1 - s_i*(w.x_i + b)), with
  // reg = 1/(n*c). Minimizers coincide with hinge_objective's.
  const double reg = 1.0 / (static_cast<double>(n) * c);
  const double radius = std::sqrt(2.0 / reg);  // ||w*|| bound from F(0) = 1

  Vector w = Vector::Zero(d);
  double b = 0.0;
  Vector best_w = w;
  double best_b = b;
  double best_f = 1.0;  // F at the zero initializer

  for (int t = 1; t <= kIterations; ++t) {
    const Vector f_values = (x * w).array() + b;
    const Vector margins = s.cwiseProduct(f_values);
    const Vector active =
        (margins.array() < 1.0).select(s, Vector::Zero(n));
    const double f =
        0.5 * reg * w.squaredNorm() +
        (1.0 - margins.array()).cwiseMax(0.0).mean();
    if (f < best_f) {
      best_f = f;
      best_w = w;
      best_b = b;
    }
    const Vector grad_w =
        reg * w - (x.transpose() * active) / static_cast<double>(n);
    const double grad_b = -active.mean();
    const double step = 1.0 / (1.0 + reg * static_cast<double>(t));
    w -= step * grad_w;
    b -= step * grad_b;
    const double norm = w.norm();
    if (norm > radius) w *= radius / norm;
  }

  // The loop body evaluates F before stepping, so score the final iterate too.
  {
    const Vector f_values = (x * w).array() + b;
    const Vector margins = s.cwiseProduct(f_values);
    const double f = 0.5 * reg * w.squaredNorm() +
                     (1.0 - margins.array()).cwiseMax(0.0).mean();
    if (f < best_f) {
      best_f = f;
      best_w = w;
      best_b = b;
    }
  }

  BaseClassifier model;
  model.weights = best_w;
  model.bias = best_b;
  model.single_class = false;
  model.objective = hinge_objective(x, y, best_w, best_b, c);
  return model;
}

}  // namespace dcshs
