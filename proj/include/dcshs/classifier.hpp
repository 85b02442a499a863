#pragma once

#include <vector>

#include "dcshs/dataset.hpp"
#include "dcshs/numerics.hpp"

namespace dcshs {

// Linear decision function thresholded at zero; the minority class sits on
// the positive side. Single-class training data yields a constant classifier
// (zero weights, bias at the lone class's sign) so the decision path stays
// uniform.
struct BaseClassifier {
  Vector weights;
  double bias = 0.0;
  bool single_class = false;
  double objective = 0.0;  // soft-margin objective at the returned parameters

  // One signed decision value per row of x.
  Vector decision(const Matrix& x) const;
};

// Soft-margin objective 0.5*||w||^2 + c * sum_i max(0, 1 - s_i*(w.x_i + b))
// with s = +1 for minority rows and -1 for majority rows.
double hinge_objective(const Matrix& x, const std::vector<Label>& y,
                       const Vector& w, double b, double c);

// Full-batch subgradient descent on the soft-margin objective with an
// inverse-scaling step schedule and best-iterate tracking. Initialization is
// the zero vector and no randomness is drawn, so identical inputs give
// identical parameters.
BaseClassifier train_base(const Matrix& x, const std::vector<Label>& y,
                          double c = 1.0);

}  // namespace dcshs
