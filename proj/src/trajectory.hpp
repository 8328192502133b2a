#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "errors.hpp"
#include "team.hpp"

namespace stldec {

/// Uniformly sampled vector signal: sample k is the state at start + k*dt.
class Trajectory {
 public:
  Trajectory(double dt, double start, std::vector<Eigen::VectorXd> samples);

  double dt() const { return dt_; }
  double start() const { return start_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(samples_.size()); }
  double end() const { return time_of(size() - 1); }

  const Eigen::VectorXd& sample(int k) const;
  double time_of(int k) const { return start_ + static_cast<double>(k) * dt_; }

  /// Largest sample index whose time is <= t (within snap tolerance).
  /// Throws EvalError when t precedes the first sample.
  int floor_index(double t) const;
  /// Smallest sample index whose time is >= t (within snap tolerance).
  /// Throws EvalError when t exceeds the sampled horizon.
  int ceil_index(double t) const;
  /// Nearest sample index; throws EvalError outside [start, end].
  int nearest_index(double t) const;

  /// Per-team (or any selection) restriction of the signal.
  Trajectory select(const SelectionMatrix& sel) const;

  /// CSV with header "t,x1,...,xn", one row per sample.
  std::string to_csv() const;
  /// Accepts the same format, header optional; requires a uniform time grid.
  static Trajectory from_csv(const std::string& text);

 private:
  double dt_;
  double start_;
  int dim_;
  std::vector<Eigen::VectorXd> samples_;
};

}  // namespace stldec
