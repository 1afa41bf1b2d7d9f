#include "lcsync/dynsys.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace lcsync {

VectorField::VectorField(int dim, EvalFn eval, JacobianFn jacobian, std::string name)
    : dim_(dim), eval_(std::move(eval)), jacobian_(std::move(jacobian)), name_(std::move(name)) {
  if (dim_ < 1) throw std::invalid_argument("VectorField: dimension must be >= 1");
  if (!eval_ || !jacobian_) throw std::invalid_argument("VectorField: eval and jacobian required");
}

Vector VectorField::eval(const Vector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("VectorField::eval: state dimension mismatch");
  Vector dx(dim_);
  eval_(x, dx);
  return dx;
}

Matrix VectorField::jacobian(const Vector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("VectorField::jacobian: state dimension mismatch");
  Matrix jac(dim_, dim_);
  jacobian_(x, jac);
  return jac;
}

VectorField rossler_field(const RosslerParams& p) {
  if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c))
    throw std::invalid_argument("rossler_field: parameters must be finite");
  const double a = p.a, b = p.b, c = p.c;
  auto eval = [a, b, c](Eigen::Ref<const Vector> x, Eigen::Ref<Vector> dx) {
    dx[0] = -x[1] - x[2];
    dx[1] = x[0] + a * x[1];
    dx[2] = b + x[2] * (x[0] - c);
  };
  auto jac = [a, c](Eigen::Ref<const Vector> x, Eigen::Ref<Matrix> j) {
    j << 0.0, -1.0, -1.0,
         1.0, a, 0.0,
         x[2], 0.0, x[0] - c;
  };
  return VectorField(3, eval, jac, "rossler");
}

VectorField zero_field(int n) {
  if (n < 1) throw std::invalid_argument("zero_field: n must be >= 1");
  return VectorField(
      n, [](Eigen::Ref<const Vector>, Eigen::Ref<Vector> dx) { dx.setZero(); },
      [](Eigen::Ref<const Vector>, Eigen::Ref<Matrix> j) { j.setZero(); }, "zero");
}

VectorField linear_field(Matrix a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("linear_field: matrix must be square and non-empty");
  const int n = static_cast<int>(a.rows());
  return VectorField(
      n, [a](Eigen::Ref<const Vector> x, Eigen::Ref<Vector> dx) { dx.noalias() = a * x; },
      [a](Eigen::Ref<const Vector>, Eigen::Ref<Matrix> j) { j = a; }, "linear");
}

Matrix finite_difference_jacobian(const VectorField& field, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_jacobian: h must be positive");
  const int n = field.dim();
  Matrix jac(n, n);
  Vector xp = x, xm = x, fp(n), fm(n);
  for (int k = 0; k < n; ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    field.eval(xp, fp);
    field.eval(xm, fm);
    jac.col(k) = (fp - fm) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return jac;
}

}  // namespace lcsync
