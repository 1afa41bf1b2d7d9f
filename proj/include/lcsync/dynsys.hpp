#pragma once

#include <functional>
#include <string>

#include "lcsync/types.hpp"

namespace lcsync {

/// Node dynamics x' = f(x) together with its analytic Jacobian Df.
///
/// Instances are immutable; copies share nothing mutable, so a field may be
/// evaluated concurrently from several threads.
class VectorField {
 public:
  using EvalFn = std::function<void(Eigen::Ref<const Vector> x, Eigen::Ref<Vector> dx)>;
  using JacobianFn = std::function<void(Eigen::Ref<const Vector> x, Eigen::Ref<Matrix> jac)>;

  VectorField(int dim, EvalFn eval, JacobianFn jacobian, std::string name = "custom");

  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }

  void eval(Eigen::Ref<const Vector> x, Eigen::Ref<Vector> dx) const { eval_(x, dx); }
  Vector eval(const Vector& x) const;

  void jacobian(Eigen::Ref<const Vector> x, Eigen::Ref<Matrix> jac) const { jacobian_(x, jac); }
  Matrix jacobian(const Vector& x) const;

 private:
  int dim_;
  EvalFn eval_;
  JacobianFn jacobian_;
  std::string name_;
};

struct RosslerParams {
  double a = 0.165;
  double b = 0.2;
  double c = 10.0;
};

/// x1' = -x2 - x3, x2' = x1 + a x2, x3' = b + x3 (x1 - c).
VectorField rossler_field(const RosslerParams& params);

/// f == 0 in dimension n. Throws std::invalid_argument for n < 1.
VectorField zero_field(int n);

/// f(x) = A x.
VectorField linear_field(Matrix a);

/// Central-difference Jacobian, one column per coordinate. Test oracle only.
Matrix finite_difference_jacobian(const VectorField& field, const Vector& x, double h);

}  // namespace lcsync
