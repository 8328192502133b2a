#include "trajectory.hpp"

#include <cmath>
#include <sstream>

#include "formula.hpp"

namespace stldec {

namespace {
// Tolerance for deciding that a query time sits exactly on a grid point.
constexpr double kSnapEps = 1e-9;
}  // namespace

Trajectory::Trajectory(double dt, double start, std::vector<Eigen::VectorXd> samples)
    : dt_(dt), start_(start), samples_(std::move(samples)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InputError("trajectory dt must be positive");
  if (start_ < 0.0 || !std::isfinite(start_))
    throw InputError("trajectory start must be nonnegative");
  if (samples_.empty()) throw InputError("trajectory requires at least one sample");
  dim_ = static_cast<int>(samples_[0].size());
  if (dim_ < 1) throw InputError("trajectory samples must be nonempty vectors");
  for (const auto& s : samples_)
    if (s.size() != dim_) throw InputError("trajectory samples must share one dimension");
}

const Eigen::VectorXd& Trajectory::sample(int k) const {
  if (k < 0 || k >= size()) throw EvalError("sample index out of range");
  return samples_[static_cast<size_t>(k)];
}

int Trajectory::floor_index(double t) const {
  double q = (t - start_) / dt_;
  int k = static_cast<int>(std::floor(q + kSnapEps));
  if (k < 0)
    throw EvalError("time " + format_double(t) + " precedes the first sample at " +
                    format_double(start_));
  if (k >= size()) k = size() - 1;  // t beyond the grid still has a floor
  return k;
}

int Trajectory::ceil_index(double t) const {
  double q = (t - start_) / dt_;
  int k = static_cast<int>(std::ceil(q - kSnapEps));
  if (k < 0) k = 0;
  if (k >= size())
    throw EvalError("horizon too short: time " + format_double(t) +
                    " extends past the last sample at " + format_double(end()));
  return k;
}

int Trajectory::nearest_index(double t) const {
  double q = (t - start_) / dt_;
  int k = static_cast<int>(std::llround(q));
  if (k < 0 || k >= size())
    throw EvalError("time " + format_double(t) + " outside the sampled horizon [" +
                    format_double(start_) + "," + format_double(end()) + "]");
  return k;
}

Trajectory Trajectory::select(const SelectionMatrix& sel) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(sel.apply(s));
  return Trajectory(dt_, start_, std::move(out));
}

std::string Trajectory::to_csv() const {
  std::string out = "t";
  for (int i = 1; i <= dim_; ++i) out += ",x" + std::to_string(i);
  out += "\n";
  for (int k = 0; k < size(); ++k) {
    out += format_double(time_of(k));
    const Eigen::VectorXd& s = samples_[static_cast<size_t>(k)];
    for (int i = 0; i < dim_; ++i) out += "," + format_double(s[i]);
    out += "\n";
  }
  return out;
}

Trajectory Trajectory::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> samples;
  int cols = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (lineno == 1 && !cells.empty() && cells[0] == "t") continue;  // header
    if (cols == -1) cols = static_cast<int>(cells.size());
    if (static_cast<int>(cells.size()) != cols || cols < 2)
      throw InputError("csv row " + std::to_string(lineno) +
                       ": expected " + std::to_string(cols) + " columns");
    std::vector<double> row;
    for (const auto& c : cells) {
      size_t used = 0;
      double v;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw InputError("csv row " + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      if (used != c.size() && c.substr(used) != "\r")
        throw InputError("csv row " + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    times.push_back(row[0]);
    Eigen::VectorXd s(cols - 1);
    for (int i = 0; i < cols - 1; ++i) s[i] = row[static_cast<size_t>(i) + 1];
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw InputError("csv contains no samples");
  double start = times[0];
  double dt = samples.size() > 1 ? times[1] - times[0] : 1.0;
  if (samples.size() > 1 && !(dt > 0.0))
    throw InputError("csv time column must be strictly increasing");
  for (size_t k = 1; k < times.size(); ++k) {
    double expect = start + static_cast<double>(k) * dt;
    if (std::abs(times[k] - expect) > 1e-6 * std::max(1.0, std::abs(expect)))
      throw InputError("csv time grid is not uniform at row " + std::to_string(k + 1));
  }
  return Trajectory(dt, start, std::move(samples));
}

}  // namespace stldec
