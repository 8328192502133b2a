#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "errors.hpp"

namespace stldec {

/// Names one coordinate of the stacked global state: component `component`
/// (0-based) of agent `agent_id`.
struct GlobalCoord {
  int agent_id = 0;
  int component = 0;

  friend bool operator==(const GlobalCoord&, const GlobalCoord&) = default;
  friend auto operator<=>(const GlobalCoord&, const GlobalCoord&) = default;
};

enum class PredicateFamily { ConcaveQuadratic, Affine };

/// Concave predicate function over the coordinates named by `footprint`,
/// evaluated on the footprint-ordered subvector y:
///   ConcaveQuadratic: h(y) = offset - (y - center)' W (y - center),  W sym. PSD
///   Affine:           h(y) = gradient' y + offset
class PredicateFunction {
 public:
  /// Empty affine placeholder; build real instances with the factories.
  PredicateFunction() = default;

  static PredicateFunction concave_quadratic(double offset, Eigen::VectorXd center,
                                             Eigen::MatrixXd weight,
                                             std::vector<GlobalCoord> footprint);
  static PredicateFunction affine(Eigen::VectorXd gradient, double offset,
                                  std::vector<GlobalCoord> footprint);

  PredicateFamily family() const { return family_; }
  int arity() const { return static_cast<int>(footprint_.size()); }
  const std::vector<GlobalCoord>& footprint() const { return footprint_; }
  double offset() const { return offset_; }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& weight() const { return weight_; }
  const Eigen::VectorXd& gradient_coefficients() const { return gradient_; }

  double value(const Eigen::VectorXd& y) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd hessian() const;  // constant for both families

  /// Negation: valid only for the affine family (stays concave).
  PredicateFunction negated() const;

 private:
  void check_arity(const Eigen::VectorXd& y) const;

  PredicateFamily family_ = PredicateFamily::Affine;
  double offset_ = 0.0;
  Eigen::VectorXd center_;
  Eigen::MatrixXd weight_;
  Eigen::VectorXd gradient_;
  std::vector<GlobalCoord> footprint_;
};

}  // namespace stldec
