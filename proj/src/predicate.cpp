#include "predicate.hpp"

namespace stldec {

namespace {

void check_footprint(const std::vector<GlobalCoord>& fp) {
  if (fp.empty()) throw InputError("predicate footprint must not be empty");
  for (size_t i = 0; i < fp.size(); ++i) {
    if (fp[i].component < 0)
      throw InputError("footprint component index must be nonnegative");
    if (i > 0 && !(fp[i - 1] < fp[i]))
      throw InputError(
          "footprint coordinates must be distinct and in ascending global order");
  }
}

}  // namespace

PredicateFunction PredicateFunction::concave_quadratic(
    double offset, Eigen::VectorXd center, Eigen::MatrixXd weight,
    std::vector<GlobalCoord> footprint) {
  check_footprint(footprint);
  const auto d = static_cast<Eigen::Index>(footprint.size());
  if (center.size() != d)
    throw InputError("quadratic center size must match footprint size");
  if (weight.rows() != d || weight.cols() != d)
    throw InputError("quadratic weight must be square of footprint size");
  if (!weight.isApprox(weight.transpose(), 1e-10))
    throw InputError("quadratic weight matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(weight);
  if (eig.info() != Eigen::Success)
    throw InputError("quadratic weight eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() < -1e-10)
    throw InputError("quadratic weight matrix must be positive semidefinite");

  PredicateFunction p;
  p.family_ = PredicateFamily::ConcaveQuadratic;
  p.offset_ = offset;
  p.center_ = std::move(center);
  p.weight_ = std::move(weight);
  p.footprint_ = std::move(footprint);
  return p;
}

PredicateFunction PredicateFunction::affine(Eigen::VectorXd gradient, double offset,
                                            std::vector<GlobalCoord> footprint) {
  check_footprint(footprint);
  if (gradient.size() != static_cast<Eigen::Index>(footprint.size()))
    throw InputError("affine gradient size must match footprint size");
  PredicateFunction p;
  p.family_ = PredicateFamily::Affine;
  p.offset_ = offset;
  p.gradient_ = std::move(gradient);
  p.footprint_ = std::move(footprint);
  return p;
}

void PredicateFunction::check_arity(const Eigen::VectorXd& y) const {
  if (y.size() != static_cast<Eigen::Index>(footprint_.size()))
    throw EvalError("predicate dimension mismatch: expected " +
                    std::to_string(footprint_.size()) + " coordinates, got " +
                    std::to_string(y.size()));
}

double PredicateFunction::value(const Eigen::VectorXd& y) const {
  check_arity(y);
  if (family_ == PredicateFamily::ConcaveQuadratic) {
    Eigen::VectorXd d = y - center_;
    return offset_ - d.dot(weight_ * d);
  }
  return gradient_.dot(y) + offset_;
}

Eigen::VectorXd PredicateFunction::gradient(const Eigen::VectorXd& y) const {
  check_arity(y);
  if (family_ == PredicateFamily::ConcaveQuadratic)
    return -2.0 * (weight_ * (y - center_));
  return gradient_;
}

Eigen::MatrixXd PredicateFunction::hessian() const {
  const auto d = static_cast<Eigen::Index>(footprint_.size());
  if (family_ == PredicateFamily::ConcaveQuadratic) return -2.0 * weight_;
  return Eigen::MatrixXd::Zero(d, d);
}

PredicateFunction PredicateFunction::negated() const {
  if (family_ != PredicateFamily::Affine)
    throw InputError(
        "negated quadratic predicate is convex and cannot be decomposed; "
        "only affine predicates may be negated here");
  PredicateFunction p = *this;
  p.gradient_ = -p.gradient_;
  p.offset_ = -p.offset_;
  return p;
}

}  // namespace stldec
