#include "decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "log.hpp"

namespace stldec {

double HypercubePredicate::value(const Eigen::VectorXd& z) const {
  if (z.size() != center.size())
    throw EvalError("hypercube predicate dimension mismatch: expected " +
                    std::to_string(center.size()) + ", got " +
                    std::to_string(z.size()));
  double worst = 0.0;
  for (int eta : indices) worst = std::max(worst, std::abs(z[eta] - center[eta]));
  return radius - worst;
}

std::vector<Eigen::VectorXd> HypercubePredicate::vertex_set() const {
  return stldec::vertex_set(center, radius, indices);
}

std::vector<Eigen::VectorXd> vertex_set(const Eigen::VectorXd& center, double radius,
                                        const std::vector<int>& indices) {
  if (radius < 0.0) throw InputError("vertex set requires a nonnegative radius");
  const size_t d = indices.size();
  if (d > 30) throw InputError("vertex set too large to enumerate");
  std::vector<Eigen::VectorXd> out;
  out.reserve(1ull << d);
  for (unsigned long mask = 0; mask < (1ul << d); ++mask) {
    Eigen::VectorXd v = center;
    for (size_t j = 0; j < d; ++j) {
      // lexicographic sign order: index 0 is the most significant bit, - first
      bool plus = (mask >> (d - 1 - j)) & 1ul;
      v[indices[j]] += plus ? radius : -radius;
    }
    out.push_back(std::move(v));
  }
  return out;
}

int DecompositionProblem::center_var(int team_slot, int row) const {
  return center_base_[static_cast<size_t>(team_slot)] + row;
}

int DecompositionProblem::radius_var(int team_slot) const {
  return center_base_[static_cast<size_t>(team_slot)] +
         static_cast<int>(split.teams[static_cast<size_t>(team_slot)].local_indices.size());
}

Eigen::VectorXd DecompositionProblem::corner(const Eigen::VectorXd& vars,
                                             unsigned long mask) const {
  const int d = split.total_width();
  Eigen::VectorXd y(d);
  for (int j = 0; j < d; ++j) {
    int slot = split.position_team[static_cast<size_t>(j)];
    int row = split.position_row[static_cast<size_t>(j)];
    bool plus = (mask >> (d - 1 - j)) & 1ul;
    double r = vars[radius_var(slot)];
    y[j] = vars[center_var(slot, row)] + (plus ? r : -r);
  }
  return y;
}

DecompositionProblem assemble_program(const PredicateFunction& pred,
                                      const TeamPartition& partition,
                                      const std::vector<TeamDomain>& domains,
                                      int source_index) {
  if (pred.footprint().empty()) throw InputError("predicate footprint is empty");
  if (static_cast<int>(domains.size()) != partition.team_count())
    throw InputError("one domain box per team is required");
  for (int l = 0; l < partition.team_count(); ++l) {
    const TeamDomain& d = domains[static_cast<size_t>(l)];
    if (d.lower.size() != partition.team_dim(l) || d.upper.size() != partition.team_dim(l))
      throw InputError("domain box size mismatch for team " + std::to_string(l));
  }

  DecompositionProblem prob;
  prob.predicate = pred;
  prob.split = footprint_selection(pred, partition);
  prob.source_index = source_index;
  for (const auto& tf : prob.split.teams)
    prob.domains.push_back(domains[static_cast<size_t>(tf.team)]);

  // Variable layout and box bounds.
  int vars = 0;
  for (const auto& tf : prob.split.teams) {
    prob.center_base_.push_back(vars);
    vars += static_cast<int>(tf.local_indices.size()) + 1;
  }
  ConvexProgram& cp = prob.program;
  cp.var_count = vars;
  cp.objective = Eigen::VectorXd::Zero(vars);
  cp.lower = Eigen::VectorXd::Zero(vars);
  cp.upper = Eigen::VectorXd::Zero(vars);
  for (size_t slot = 0; slot < prob.split.teams.size(); ++slot) {
    const TeamFootprint& tf = prob.split.teams[slot];
    const TeamDomain& dom = prob.domains[slot];
    double r_max = std::numeric_limits<double>::infinity();
    for (size_t row = 0; row < tf.local_indices.size(); ++row) {
      int eta = tf.local_indices[row];
      int v = prob.center_var(static_cast<int>(slot), static_cast<int>(row));
      cp.lower[v] = dom.lower[eta];
      cp.upper[v] = dom.upper[eta];
      if (!(dom.lower[eta] < dom.upper[eta]))
        throw InputError("degenerate domain interval for team " +
                         std::to_string(tf.team));
      r_max = std::min(r_max, 0.5 * (dom.upper[eta] - dom.lower[eta]));
    }
    int rv = prob.radius_var(static_cast<int>(slot));
    cp.objective[rv] = 1.0;
    cp.lower[rv] = 0.0;
    cp.upper[rv] = r_max;
  }

  // One concave constraint per corner combination. The lambdas share a
  // value-held context so the program stays valid across copies.
  const int d = prob.split.total_width();
  if (d > 30) throw InputError("footprint too wide: corner enumeration would not terminate");
  prob.vertex_constraint_count = 1 << d;

  struct CornerContext {
    PredicateFunction pred;
    std::vector<int> center_var_of;  // per footprint position
    std::vector<int> radius_var_of;
    int width;

    Eigen::VectorXd corner(const Eigen::VectorXd& vars, unsigned long mask) const {
      Eigen::VectorXd y(width);
      for (int j = 0; j < width; ++j) {
        bool plus = (mask >> (width - 1 - j)) & 1ul;
        double r = vars[radius_var_of[static_cast<size_t>(j)]];
        y[j] = vars[center_var_of[static_cast<size_t>(j)]] + (plus ? r : -r);
      }
      return y;
    }
  };
  auto ctx = std::make_shared<CornerContext>(CornerContext{pred, {}, {}, d});
  for (int j = 0; j < d; ++j) {
    int slot = prob.split.position_team[static_cast<size_t>(j)];
    int row = prob.split.position_row[static_cast<size_t>(j)];
    ctx->center_var_of.push_back(prob.center_var(slot, row));
    ctx->radius_var_of.push_back(prob.radius_var(slot));
  }

  for (unsigned long mask = 0; mask < (1ul << d); ++mask) {
    ConstraintFunction c;
    c.label = "corner " + std::to_string(mask);
    c.value = [ctx, mask](const Eigen::VectorXd& vars_) {
      return ctx->pred.value(ctx->corner(vars_, mask));
    };
    c.gradient = [ctx, mask](const Eigen::VectorXd& vars_) {
      Eigen::VectorXd hy = ctx->pred.gradient(ctx->corner(vars_, mask));
      Eigen::VectorXd g = Eigen::VectorXd::Zero(vars_.size());
      for (int j = 0; j < ctx->width; ++j) {
        bool plus = (mask >> (ctx->width - 1 - j)) & 1ul;
        g[ctx->center_var_of[static_cast<size_t>(j)]] += hy[j];
        g[ctx->radius_var_of[static_cast<size_t>(j)]] += plus ? hy[j] : -hy[j];
      }
      return g;
    };
    c.hessian = [ctx, mask](const Eigen::VectorXd& vars_) {
      // Chain rule through the affine corner map y = S vars + const: S' H S.
      Eigen::MatrixXd hh = ctx->pred.hessian();
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ctx->width, vars_.size());
      for (int j = 0; j < ctx->width; ++j) {
        bool plus = (mask >> (ctx->width - 1 - j)) & 1ul;
        s(j, ctx->center_var_of[static_cast<size_t>(j)]) = 1.0;
        s(j, ctx->radius_var_of[static_cast<size_t>(j)]) = plus ? 1.0 : -1.0;
      }
      return Eigen::MatrixXd(s.transpose() * hh * s);
    };
    cp.constraints.push_back(std::move(c));
  }

  // Keep each box inside the domain: c - r >= lo and hi - c - r >= 0.
  for (size_t slot = 0; slot < prob.split.teams.size(); ++slot) {
    const TeamFootprint& tf = prob.split.teams[slot];
    const TeamDomain& dom = prob.domains[slot];
    for (size_t row = 0; row < tf.local_indices.size(); ++row) {
      int cv = prob.center_var(static_cast<int>(slot), static_cast<int>(row));
      int rv = prob.radius_var(static_cast<int>(slot));
      double lo = dom.lower[tf.local_indices[row]];
      double hi = dom.upper[tf.local_indices[row]];
      ConstraintFunction lower_c;
      lower_c.label = "domain-low t" + std::to_string(tf.team) + " r" + std::to_string(row);
      lower_c.value = [cv, rv, lo](const Eigen::VectorXd& v) { return v[cv] - v[rv] - lo; };
      lower_c.gradient = [cv, rv](const Eigen::VectorXd& v) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
        g[cv] = 1.0;
        g[rv] = -1.0;
        return g;
      };
      lower_c.hessian = [](const Eigen::VectorXd& v) {
        return Eigen::MatrixXd::Zero(v.size(), v.size()).eval();
      };
      cp.constraints.push_back(std::move(lower_c));

      ConstraintFunction upper_c;
      upper_c.label = "domain-high t" + std::to_string(tf.team) + " r" + std::to_string(row);
      upper_c.value = [cv, rv, hi](const Eigen::VectorXd& v) { return hi - v[cv] - v[rv]; };
      upper_c.gradient = [cv, rv](const Eigen::VectorXd& v) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
        g[cv] = -1.0;
        g[rv] = -1.0;
        return g;
      };
      upper_c.hessian = [](const Eigen::VectorXd& v) {
        return Eigen::MatrixXd::Zero(v.size(), v.size()).eval();
      };
      cp.constraints.push_back(std::move(upper_c));
    }
  }
  return prob;
}

namespace {

DecompositionResult result_from_point(const DecompositionProblem& prob,
                                      const Eigen::VectorXd& vars) {
  DecompositionResult res;
  res.objective = 0.0;
  for (size_t slot = 0; slot < prob.split.teams.size(); ++slot) {
    const TeamFootprint& tf = prob.split.teams[slot];
    const TeamDomain& dom = prob.domains[slot];
    HypercubePredicate box;
    box.team = tf.team;
    box.source_index = prob.source_index;
    box.indices = tf.local_indices;
    box.center = 0.5 * (dom.lower + dom.upper);  // midpoints off the footprint
    for (size_t row = 0; row < tf.local_indices.size(); ++row)
      box.center[tf.local_indices[row]] =
          vars[prob.center_var(static_cast<int>(slot), static_cast<int>(row))];
    box.radius = std::max(0.0, vars[prob.radius_var(static_cast<int>(slot))]);
    res.objective += box.radius;
    if (box.radius <= 1e-9) res.degenerate = true;
    res.boxes.push_back({tf.team, std::move(box)});
  }
  return res;
}

}  // namespace

DecompositionResult solve_decomposition(const DecompositionProblem& prob,
                                        const SolverConfig& cfg) {
  SolveResult sr = solve(prob.program, cfg);
  if (sr.status == SolveStatus::Infeasible) {
    // Distinguish an empty feasible set from one with empty interior (the
    // level set touches the boxes only at isolated points, forcing r = 0).
    SolverConfig tight = cfg;
    tight.eps_opt = 1e-8;
    PhaseOneResult ph = phase_one_slack(prob.program, tight);
    if (ph.slack < -1e-7)
      throw InfeasibleError(
          "decomposition infeasible: the predicate's zero level-set does not meet "
          "the domain");
    Eigen::VectorXd vars = ph.point;
    for (size_t slot = 0; slot < prob.split.teams.size(); ++slot)
      vars[prob.radius_var(static_cast<int>(slot))] = 0.0;
    DecompositionResult res = result_from_point(prob, vars);
    res.status = SolveStatus::Optimal;
    res.degenerate = true;
    double worst = 0.0;
    for (const auto& c : prob.program.constraints)
      worst = std::max(worst, -c.value(vars));
    res.max_constraint_violation = worst;
    res.method = "barrier";
    return res;
  }
  DecompositionResult res = result_from_point(prob, sr.point);
  res.status = sr.status;
  res.outer_iterations = sr.outer_iterations;
  res.newton_steps = sr.newton_steps;
  res.max_constraint_violation = sr.max_constraint_violation;
  res.kkt_residual = sr.kkt_residual;
  res.method = "barrier";
  return res;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact radius maximization machinery for the oracle. Feasibility is
// downward-closed in every radius (a smaller box's corners lie in the hull of
// the larger one's), so along one radius the binding set is an interval
// [0, r*]: r* follows from per-corner root finding, since the predicate
// restricted to the radius line is exactly quadratic for both families.
class RadiusResolver {
 public:
  explicit RadiusResolver(const DecompositionProblem& prob) : prob_(prob) {
    teams_ = static_cast<int>(prob.split.teams.size());
    for (int t = 0; t < teams_; ++t) radius_var_.push_back(prob.radius_var(t));
  }

  // Largest radius the corner constraints alone allow for team `t` (other
  // entries of `vars` fixed); negative when even r = 0 fails. Leaves the
  // team's radius variable zeroed.
  double corner_root(Eigen::VectorXd& vars, int t) const {
    const int width = prob_.split.total_width();
    const double delta = 0.5;
    const int rv = radius_var_[static_cast<size_t>(t)];
    double best = kInf;
    for (unsigned long mask = 0; mask < (1ul << width); ++mask) {
      // The predicate along the radius line is a quadratic; three samples
      // recover it exactly.
      vars[rv] = 0.0;
      double f0 = prob_.predicate.value(prob_.corner(vars, mask));
      vars[rv] = delta;
      double f1 = prob_.predicate.value(prob_.corner(vars, mask));
      vars[rv] = 2.0 * delta;
      double f2 = prob_.predicate.value(prob_.corner(vars, mask));
      vars[rv] = 0.0;
      double alpha = (2.0 * f1 - f0 - f2) / (2.0 * delta * delta);
      double beta = (f1 - f0) / delta + alpha * delta;
      double gamma = f0;
      if (gamma < 0.0) return -1.0;
      double root;
      if (alpha <= 1e-12) {
        root = beta >= -1e-12 ? kInf : gamma / -beta;
      } else {
        double disc = beta * beta + 4.0 * alpha * gamma;
        root = (beta + std::sqrt(std::max(disc, 0.0))) / (2.0 * alpha);
      }
      best = std::min(best, root);
      if (best < 0.0) return -1.0;
    }
    return best;
  }

  // Largest feasible radius for team `t` with all other entries of `vars`
  // (centers and other radii) held fixed; negative when even r = 0 fails.
  double max_radius(Eigen::VectorXd& vars, int t) const {
    double cap = prob_.program.upper[radius_var_[static_cast<size_t>(t)]];
    const TeamFootprint& tf = prob_.split.teams[static_cast<size_t>(t)];
    const TeamDomain& dom = prob_.domains[static_cast<size_t>(t)];
    for (size_t row = 0; row < tf.local_indices.size(); ++row) {
      double c = vars[prob_.center_var(t, static_cast<int>(row))];
      int eta = tf.local_indices[row];
      cap = std::min(cap, c - dom.lower[eta]);
      cap = std::min(cap, dom.upper[eta] - c);
    }
    if (cap < 0.0) return -1.0;
    double root = corner_root(vars, t);
    if (root < 0.0) return -1.0;
    return std::min(cap, root);
  }

  // Corner budget left above the chosen radii, ignoring domain caps. Flat
  // stretches of the objective (domain-capped radii) are ordered by this, so
  // a search can drift along plateaus toward centers with more slack.
  double corner_headroom(Eigen::VectorXd& vars) const {
    double total = 0.0;
    for (int t = 0; t < teams_; ++t) {
      const int rv = radius_var_[static_cast<size_t>(t)];
      double keep = vars[rv];
      double root = corner_root(vars, t);
      vars[rv] = keep;
      total += std::min(root, 10.0) - keep;
    }
    return total;
  }

  // Best achievable radius sum for teams t.. with earlier radii fixed;
  // leaves the maximizing radii in `vars`. Golden-section over each radius
  // but the last (the slice objective is concave), closed form at the end.
  double best_tail(Eigen::VectorXd& vars, int t) const {
    if (t == teams_ - 1) {
      double r = max_radius(vars, t);
      if (r < 0.0) return -kInf;
      vars[radius_var_[static_cast<size_t>(t)]] = r;
      return r;
    }
    for (int l = t + 1; l < teams_; ++l)
      vars[radius_var_[static_cast<size_t>(l)]] = 0.0;
    double cap = max_radius(vars, t);
    if (cap < 0.0) return -kInf;
    const int rv = radius_var_[static_cast<size_t>(t)];
    auto eval = [&](double r) {
      vars[rv] = r;
      double tail = best_tail(vars, t + 1);
      return tail == -kInf ? -kInf : r + tail;
    };
    // tail feasibility is downward-closed in r as well
    while (cap > 1e-12 && eval(cap) == -kInf) cap *= 0.7;

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = cap;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 48; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = eval(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = eval(x1);
      }
    }
    double flo = eval(lo);
    double fhi = eval(hi);
    double best = std::max(std::max(f1, f2), std::max(flo, fhi));
    // leave the argmax radii in place
    if (best == flo) return eval(lo);
    if (best == fhi) return eval(hi);
    if (best == f2) return eval(x2);
    return eval(x1);
  }

 private:
  const DecompositionProblem& prob_;
  int teams_ = 0;
  std::vector<int> radius_var_;
};

}  // namespace

DecompositionResult grid_oracle(const DecompositionProblem& prob, int resolution,
                                int passes) {
  const int n = prob.program.var_count;
  if (n > 6)
    throw InputError("grid oracle limited to 6 decision variables, got " +
                     std::to_string(n));
  if (resolution < 3) throw InputError("grid oracle needs at least 3 points per axis");
  if (resolution % 2 == 0) ++resolution;

  // Center variables carry the search; radii are resolved exactly per center.
  std::vector<int> center_vars;
  for (size_t slot = 0; slot < prob.split.teams.size(); ++slot)
    for (size_t row = 0; row < prob.split.teams[slot].local_indices.size(); ++row)
      center_vars.push_back(prob.center_var(static_cast<int>(slot), static_cast<int>(row)));
  const int dc = static_cast<int>(center_vars.size());

  RadiusResolver resolver(prob);
  Eigen::VectorXd vars = 0.5 * (prob.program.lower + prob.program.upper);
  bool have_best = false;
  Eigen::VectorXd best_center(dc);
  Eigen::VectorXd best_vars;
  double best_obj = -kInf;
  double best_headroom = -kInf;

  auto eval_center = [&](const Eigen::VectorXd& center) {
    for (int i = 0; i < dc; ++i) vars[center_vars[static_cast<size_t>(i)]] = center[i];
    double obj = resolver.best_tail(vars, 0);
    if (obj == -kInf) return;
    // ties in the objective (domain-capped radii) are ordered by corner
    // headroom, letting the refinement drift along plateaus
    double headroom = obj >= best_obj - 1e-12 ? resolver.corner_headroom(vars) : -kInf;
    if (obj > best_obj + 1e-12 ||
        (obj > best_obj - 1e-12 && headroom > best_headroom + 1e-12)) {
      best_obj = std::max(best_obj, obj);
      best_headroom = headroom;
      best_center = center;
      best_vars = vars;
      have_best = true;
    }
  };

  // Exhaustive sweep of the center grid, one denser retry before giving up.
  double step_max = 0.0;
  for (int attempt = 0; attempt < 2 && !have_best; ++attempt) {
    if (attempt == 1) resolution = resolution * 2 + 1;
    std::vector<int> idx(static_cast<size_t>(dc), 0);
    Eigen::VectorXd lo(dc), step(dc);
    for (int i = 0; i < dc; ++i) {
      int v = center_vars[static_cast<size_t>(i)];
      lo[i] = prob.program.lower[v];
      step[i] = (prob.program.upper[v] - prob.program.lower[v]) / (resolution - 1);
    }
    step_max = step.maxCoeff();
    Eigen::VectorXd center(dc);
    for (bool done = false; !done;) {
      for (int i = 0; i < dc; ++i) center[i] = lo[i] + step[i] * idx[static_cast<size_t>(i)];
      eval_center(center);
      int axis = dc - 1;
      for (;;) {
        if (++idx[static_cast<size_t>(axis)] < resolution) break;
        idx[static_cast<size_t>(axis)] = 0;
        if (--axis < 0) { done = true; break; }
      }
    }
  }
  if (!have_best || best_obj == -kInf)
    throw InfeasibleError("grid oracle found no feasible point");

  // Compass refinement over the centers: poll +-e_i and the pairwise
  // diagonals, re-center on improvement, halve the mesh on a stall.
  double mesh = step_max;
  for (int pass = 1; pass < passes && mesh > 1e-6; ++pass) {
    double before = best_obj;
    double before_headroom = best_headroom;
    Eigen::VectorXd base = best_center;
    auto clamped = [&](const Eigen::VectorXd& c) {
      Eigen::VectorXd out = c;
      for (int i = 0; i < dc; ++i) {
        int v = center_vars[static_cast<size_t>(i)];
        out[i] = std::min(std::max(out[i], prob.program.lower[v]), prob.program.upper[v]);
      }
      return out;
    };
    for (int i = 0; i < dc; ++i)
      for (double s : {-1.0, 1.0}) {
        Eigen::VectorXd c = base;
        c[i] += s * mesh;
        eval_center(clamped(c));
      }
    for (int i = 0; i < dc; ++i)
      for (int j = i + 1; j < dc; ++j)
        for (double si : {-1.0, 1.0})
          for (double sj : {-1.0, 1.0}) {
            Eigen::VectorXd c = base;
            c[i] += si * mesh;
            c[j] += sj * mesh;
            eval_center(clamped(c));
          }
    // full sign patterns: domain caps are minima over coordinates, so
    // progress can require moving every center coordinate at once
    for (unsigned long sign_mask = 0; sign_mask < (1ul << dc); ++sign_mask) {
      Eigen::VectorXd c = base;
      for (int i = 0; i < dc; ++i)
        c[i] += ((sign_mask >> i) & 1ul) ? mesh : -mesh;
      eval_center(clamped(c));
    }
    if (best_obj <= before + 1e-14 && best_headroom <= before_headroom + 1e-14)
      mesh *= 0.5;
  }

  DecompositionResult res = result_from_point(prob, best_vars);
  res.status = SolveStatus::Optimal;
  res.method = "grid";
  res.grid_step = std::max(mesh, 1e-6);
  log_debug("grid oracle: objective=" + std::to_string(res.objective) +
            " final_mesh=" + std::to_string(mesh));
  return res;
}

}  // namespace stldec
