#include "marsutm/bvp/solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "marsutm/logging.hpp"

namespace marsutm::bvp {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kArmijoSigma = 0.2;
constexpr int kLineSearchTrials = 8;
constexpr int kMaxFailedNewtonPasses = 3;
constexpr double kMinInterval = 1e-13;

// Lobatto points used to sample the interpolant residual inside an interval.
const double kInnerOffset = 0.5 * std::sqrt(3.0 / 7.0);

struct Hermite {
  double h00, h10, h01, h11;
  double d00, d10, d01, d11;

  explicit Hermite(double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    h10 = t3 - 2.0 * t2 + t;
    h01 = -2.0 * t3 + 3.0 * t2;
    h11 = t3 - t2;
    d00 = 6.0 * t2 - 6.0 * t;
    d10 = 3.0 * t2 - 4.0 * t + 1.0;
    d01 = -6.0 * t2 + 6.0 * t;
    d11 = 3.0 * t2 - 2.0 * t;
  }
};

void eval_ode(const BVProblem& problem, double tau, ConstVectorRef y, ConstVectorRef p, VectorRef out) {
  problem.ode(tau, y, p, out);
  if (!out.allFinite()) throw EvaluationRejected("non-finite right-hand side");
}

// Collocation residuals and the intermediate quantities the Jacobian needs.
struct System {
  Matrix f;     // n x m
  Matrix y_mid; // n x (m-1)
  Matrix f_mid; // n x (m-1)
  Vector residual; // n*(m-1) collocation rows followed by n+k boundary rows
};

class Collocation {
 public:
  Collocation(const BVProblem& problem, std::vector<double> nodes)
      : problem_(problem), nodes_(std::move(nodes)), n_(problem.dimension), k_(problem.n_params) {
    h_.resize(nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) h_[i] = nodes_[i + 1] - nodes_[i];
  }

  std::size_t nodes() const { return nodes_.size(); }
  const std::vector<double>& mesh() const { return nodes_; }
  const std::vector<double>& widths() const { return h_; }
  Eigen::Index unknowns() const { return static_cast<Eigen::Index>(n_ * nodes_.size() + k_); }

  System evaluate(const Matrix& y, const Vector& p) const {
    const auto m = static_cast<Eigen::Index>(nodes_.size());
    System s;
    s.f.resize(n_, m);
    s.y_mid.resize(n_, m - 1);
    s.f_mid.resize(n_, m - 1);
    s.residual.resize(n_ * (m - 1) + n_ + k_);

    for (Eigen::Index i = 0; i < m; ++i) eval_ode(problem_, nodes_[i], y.col(i), p, s.f.col(i));
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      const double h = h_[i];
      s.y_mid.col(i) = 0.5 * (y.col(i) + y.col(i + 1)) - 0.125 * h * (s.f.col(i + 1) - s.f.col(i));
      eval_ode(problem_, nodes_[i] + 0.5 * h, s.y_mid.col(i), p, s.f_mid.col(i));
      s.residual.segment(i * n_, n_) =
          y.col(i + 1) - y.col(i) - h / 6.0 * (s.f.col(i) + 4.0 * s.f_mid.col(i) + s.f.col(i + 1));
    }
    auto bc = s.residual.tail(n_ + k_);
    Vector bc_out(n_ + k_);
    problem_.boundary(y.col(0), y.col(m - 1), p, bc_out);
    if (!bc_out.allFinite()) throw EvaluationRejected("non-finite boundary residual");
    bc = bc_out;
    return s;
  }

  // Max scaled collocation residual and max boundary residual.
  std::pair<double, double> norms(const System& s) const {
    double col = 0.0;
    for (Eigen::Index i = 0; i < s.f_mid.cols(); ++i) {
      for (int j = 0; j < n_; ++j) {
        const double scale = h_[i] * (1.0 + std::fabs(s.f_mid(j, i)));
        col = std::max(col, std::fabs(s.residual(i * n_ + j)) / scale);
      }
    }
    const double bc = s.residual.tail(n_ + k_).cwiseAbs().maxCoeff();
    return {col, bc};
  }

  SparseMatrix jacobian(const Matrix& y, const Vector& p, const System& s, double step) const {
    const auto m = static_cast<Eigen::Index>(nodes_.size());
    const Eigen::Index pcol = n_ * m;
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>((m - 1) * (2 * n_ * n_ + n_ * k_) + (n_ + k_) * (2 * n_ + k_)));

    std::vector<Matrix> jy(m);
    std::vector<Matrix> jp(m);
    for (Eigen::Index i = 0; i < m; ++i) point_jacobian(nodes_[i], y.col(i), p, s.f.col(i), step, jy[i], jp[i]);

    const Matrix eye = Matrix::Identity(n_, n_);
    Matrix jmy, jmp;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      const double h = h_[i];
      point_jacobian(nodes_[i] + 0.5 * h, s.y_mid.col(i), p, s.f_mid.col(i), step, jmy, jmp);
      const Matrix left = -eye - h / 6.0 * (jy[i] + 4.0 * jmy * (0.5 * eye + 0.125 * h * jy[i]));
      const Matrix right = eye - h / 6.0 * (jy[i + 1] + 4.0 * jmy * (0.5 * eye - 0.125 * h * jy[i + 1]));
      const Eigen::Index row = i * n_;
      push_block(triplets, row, i * n_, left);
      push_block(triplets, row, (i + 1) * n_, right);
      if (k_ > 0) {
        const Matrix dmid = jmp - 0.125 * h * jmy * (jp[i + 1] - jp[i]);
        const Matrix dparam = -h / 6.0 * (jp[i] + 4.0 * dmid + jp[i + 1]);
        push_block(triplets, row, pcol, dparam);
      }
    }
    boundary_jacobian(triplets, y, p, step);

    SparseMatrix jac(unknowns(), unknowns());
    jac.setFromTriplets(triplets.begin(), triplets.end());
    jac.makeCompressed();
    return jac;
  }

 private:
  static void push_block(std::vector<Triplet>& out, Eigen::Index row, Eigen::Index col, const Matrix& block) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      for (Eigen::Index r = 0; r < block.rows(); ++r) out.emplace_back(row + r, col + c, block(r, c));
    }
  }

  // Central differences; falls back to a one-sided difference when one of the
  // perturbed points is rejected by the problem.
  template <typename Fn>
  static void difference_column(Fn&& fn, double x, double step, ConstVectorRef f0, VectorRef column) {
    const double d = step * std::max(1.0, std::fabs(x));
    Vector plus(column.size()), minus(column.size());
    bool ok_plus = true, ok_minus = true;
    try {
      fn(x + d, plus);
    } catch (const EvaluationRejected&) {
      ok_plus = false;
    }
    try {
      fn(x - d, minus);
    } catch (const EvaluationRejected&) {
      ok_minus = false;
    }
    if (ok_plus && ok_minus) {
      column = (plus - minus) / (2.0 * d);
    } else if (ok_plus) {
      column = (plus - f0) / d;
    } else if (ok_minus) {
      column = (f0 - minus) / d;
    } else {
      throw EvaluationRejected("jacobian perturbation rejected on both sides");
    }
  }

  void point_jacobian(double tau, ConstVectorRef y, const Vector& p, ConstVectorRef f0, double step, Matrix& jy,
                      Matrix& jp) const {
    jy.resize(n_, n_);
    jp.resize(n_, k_);
    Vector yw = y;
    for (int j = 0; j < n_; ++j) {
      const double orig = yw(j);
      difference_column(
          [&](double x, VectorRef out) {
            yw(j) = x;
            eval_ode(problem_, tau, yw, p, out);
          },
          orig, step, f0, jy.col(j));
      yw(j) = orig;
    }
    Vector pw = p;
    for (int j = 0; j < k_; ++j) {
      const double orig = pw(j);
      difference_column(
          [&](double x, VectorRef out) {
            pw(j) = x;
            eval_ode(problem_, tau, y, pw, out);
          },
          orig, step, f0, jp.col(j));
      pw(j) = orig;
    }
  }

  void boundary_jacobian(std::vector<Triplet>& out, const Matrix& y, const Vector& p, double step) const {
    const auto m = static_cast<Eigen::Index>(nodes_.size());
    const Eigen::Index row = n_ * (m - 1);
    const int rows = n_ + k_;
    Vector ya = y.col(0), yb = y.col(m - 1), pw = p;
    Vector base(rows);
    problem_.boundary(ya, yb, pw, base);

    auto column = [&](double& slot, Eigen::Index col) {
      const double orig = slot;
      Vector c(rows);
      difference_column(
          [&](double x, VectorRef res) {
            slot = x;
            problem_.boundary(ya, yb, pw, res);
            if (!res.allFinite()) throw EvaluationRejected("non-finite boundary residual");
          },
          orig, step, base, c);
      slot = orig;
      for (int r = 0; r < rows; ++r) out.emplace_back(row + r, col, c(r));
    };
    for (int j = 0; j < n_; ++j) column(ya(j), j);
    for (int j = 0; j < n_; ++j) column(yb(j), (m - 1) * n_ + j);
    for (int j = 0; j < k_; ++j) column(pw(j), n_ * m + j);
  }

  const BVProblem& problem_;
  std::vector<double> nodes_;
  std::vector<double> h_;
  int n_;
  int k_;
};

enum class NewtonOutcome { Converged, NotConverged, Rejected };

struct NewtonResult {
  NewtonOutcome outcome = NewtonOutcome::NotConverged;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
};

Vector flatten(const Matrix& y, const Vector& p) {
  Vector z(y.size() + p.size());
  z.head(y.size()) = Eigen::Map<const Vector>(y.data(), y.size());
  z.tail(p.size()) = p;
  return z;
}

void unflatten(const Vector& z, Matrix& y, Vector& p) {
  y = Eigen::Map<const Matrix>(z.data(), y.rows(), y.cols());
  p = z.tail(p.size());
}

NewtonResult newton(const Collocation& col, Matrix& y, Vector& p, const SolverOptions& options,
                    int iteration_budget) {
  NewtonResult result;
  System sys;
  try {
    sys = col.evaluate(y, p);
  } catch (const EvaluationRejected&) {
    result.outcome = NewtonOutcome::Rejected;
    return result;
  }

  auto converged = [&](const System& s) {
    const auto [c, b] = col.norms(s);
    result.residual = std::max(c, b);
    return c <= options.tolerance && b <= options.bc_tolerance;
  };
  if (converged(sys)) {
    result.outcome = NewtonOutcome::Converged;
    return result;
  }

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool pattern_ready = false;
  bool recompute = true;
  bool fresh_jacobian = false;
  Vector step, step_new;
  double cost = 0.0;

  while (result.iterations < iteration_budget) {
    if (recompute) {
      SparseMatrix jac;
      try {
        jac = col.jacobian(y, p, sys, options.jacobian_step);
      } catch (const EvaluationRejected&) {
        return result;
      }
      if (!pattern_ready) {
        lu.analyzePattern(jac);
        pattern_ready = true;
      }
      lu.factorize(jac);
      if (lu.info() != Eigen::Success) {
        log::debug("bvp: singular collocation jacobian");
        return result;
      }
      step = lu.solve(sys.residual);
      if (!step.allFinite()) return result;
      cost = step.squaredNorm();
      fresh_jacobian = true;
    }

    const Vector z = flatten(y, p);
    double alpha = 1.0;
    bool have_trial = false;
    bool sufficient = false;
    Matrix y_trial = y;
    Vector p_trial = p;
    System sys_trial;
    double cost_new = 0.0;
    for (int trial = 0; trial <= kLineSearchTrials; ++trial) {
      unflatten(z - alpha * step, y_trial, p_trial);
      try {
        sys_trial = col.evaluate(y_trial, p_trial);
      } catch (const EvaluationRejected&) {
        alpha *= 0.5;
        continue;
      }
      step_new = lu.solve(sys_trial.residual);
      cost_new = step_new.allFinite() ? step_new.squaredNorm() : std::numeric_limits<double>::infinity();
      have_trial = std::isfinite(cost_new);
      if (have_trial && cost_new < (1.0 - 2.0 * alpha * kArmijoSigma) * cost) {
        sufficient = true;
        break;
      }
      if (trial < kLineSearchTrials) alpha *= 0.5;
    }
    ++result.iterations;

    if (!have_trial) {
      if (fresh_jacobian) return result;
      recompute = true;
      continue;
    }
    if (!sufficient && fresh_jacobian) {
      // The full line search failed with an up-to-date Jacobian: stagnation.
      log::debug("bvp: newton stagnated at residual {:.3e}", result.residual);
      return result;
    }

    y = y_trial;
    p = p_trial;
    sys = std::move(sys_trial);
    log::trace("bvp: newton iter {} alpha {:.3g} cost {:.3e}", result.iterations, alpha, cost_new);
    if (converged(sys)) {
      result.outcome = NewtonOutcome::Converged;
      return result;
    }
    if (alpha == 1.0 && sufficient) {
      step = step_new;
      cost = cost_new;
      recompute = false;
      fresh_jacobian = false;
    } else {
      recompute = true;
    }
  }
  return result;
}

Matrix node_slopes(const BVProblem& problem, const Mesh& mesh) {
  Matrix f(mesh.values.rows(), mesh.values.cols());
  for (Eigen::Index i = 0; i < f.cols(); ++i) {
    eval_ode(problem, mesh.nodes[static_cast<std::size_t>(i)], mesh.values.col(i), mesh.params, f.col(i));
  }
  return f;
}

std::size_t locate(const std::vector<double>& nodes, double tau) {
  if (!(tau >= nodes.front() && tau <= nodes.back())) {
    throw std::out_of_range("tau outside the solution interval [0, 1]");
  }
  auto it = std::upper_bound(nodes.begin(), nodes.end(), tau);
  std::size_t i = static_cast<std::size_t>(std::distance(nodes.begin(), it));
  if (i == 0) return 0;
  return std::min(i - 1, nodes.size() - 2);
}

// Splits each interval whose residual exceeds tol into 2..4 equal pieces,
// choosing the count so the cubic-rate residual estimate lands below tol.
std::vector<double> refined_nodes(const std::vector<double>& nodes, const std::vector<double>& residuals,
                                  double tol, bool& changed) {
  changed = false;
  std::vector<double> out;
  out.reserve(nodes.size() * 2);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    out.push_back(nodes[i]);
    const double h = nodes[i + 1] - nodes[i];
    if (residuals[i] > tol && h > 2.0 * kMinInterval) {
      const int pieces = std::clamp(static_cast<int>(std::ceil(std::cbrt(residuals[i] / tol))), 2, 4);
      for (int k = 1; k < pieces; ++k) out.push_back(nodes[i] + h * k / pieces);
      changed = true;
    }
  }
  out.push_back(nodes.back());
  return out;
}

// Merges pairs of neighbouring intervals whose residuals are far below tol.
std::vector<double> coarsened_nodes(const std::vector<double>& nodes, const std::vector<double>& residuals,
                                    double tol) {
  const double threshold = tol / 64.0;
  std::vector<double> out;
  out.reserve(nodes.size());
  std::size_t i = 0;
  while (i + 1 < nodes.size()) {
    out.push_back(nodes[i]);
    if (i + 2 < nodes.size() && residuals[i] < threshold && residuals[i + 1] < threshold) {
      i += 2;
    } else {
      i += 1;
    }
  }
  out.push_back(nodes.back());
  return out;
}

Mesh resample(const BVPSolution& solution, std::vector<double> nodes) {
  Mesh mesh;
  mesh.values.resize(solution.mesh.values.rows(), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) mesh.values.col(static_cast<Eigen::Index>(i)) = solution.evaluate(nodes[i]);
  mesh.nodes = std::move(nodes);
  mesh.params = solution.mesh.params;
  return mesh;
}

} // namespace

void BVProblem::validate() const {
  if (dimension <= 0) throw std::invalid_argument("BVProblem: dimension must be positive");
  if (n_params < 0) throw std::invalid_argument("BVProblem: n_params must be non-negative");
  if (!ode || !boundary) throw std::invalid_argument("BVProblem: ode and boundary callbacks are required");
}

Mesh Mesh::uniform(std::size_t count, int dimension, const Vector& params) {
  if (count < 3) throw std::invalid_argument("Mesh: at least 3 nodes required");
  Mesh mesh;
  mesh.nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) mesh.nodes[i] = static_cast<double>(i) / static_cast<double>(count - 1);
  mesh.nodes.back() = 1.0;
  mesh.values = Matrix::Zero(dimension, static_cast<Eigen::Index>(count));
  mesh.params = params;
  return mesh;
}

void Mesh::validate(int dimension, int n_params, std::size_t max_nodes) const {
  if (nodes.size() < 3) throw std::invalid_argument("Mesh: at least 3 nodes required");
  if (nodes.size() > max_nodes) throw std::invalid_argument("Mesh: node count exceeds the configured maximum");
  if (nodes.front() != 0.0 || nodes.back() != 1.0) throw std::invalid_argument("Mesh: nodes must span [0, 1]");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i + 1] > nodes[i])) throw std::invalid_argument("Mesh: nodes must be strictly increasing");
  }
  if (values.rows() != dimension || values.cols() != static_cast<Eigen::Index>(nodes.size())) {
    throw std::invalid_argument("Mesh: values do not match the problem dimension and node count");
  }
  if (params.size() != n_params) throw std::invalid_argument("Mesh: parameter count mismatch");
  if (!values.allFinite() || !params.allFinite()) throw std::invalid_argument("Mesh: non-finite values");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NoConvergence: return "no convergence";
    case SolveStatus::MeshCapExceeded: return "mesh cap exceeded";
    case SolveStatus::EvaluationRejected: return "ODE evaluation rejected";
  }
  return "unknown";
}

Vector BVPSolution::evaluate(double tau) const {
  const std::size_t i = locate(mesh.nodes, tau);
  const double h = mesh.nodes[i + 1] - mesh.nodes[i];
  const Hermite w((tau - mesh.nodes[i]) / h);
  const auto c0 = static_cast<Eigen::Index>(i);
  return w.h00 * mesh.values.col(c0) + w.h10 * h * slopes.col(c0) + w.h01 * mesh.values.col(c0 + 1) +
         w.h11 * h * slopes.col(c0 + 1);
}

Vector BVPSolution::derivative(double tau) const {
  const std::size_t i = locate(mesh.nodes, tau);
  const double h = mesh.nodes[i + 1] - mesh.nodes[i];
  const Hermite w((tau - mesh.nodes[i]) / h);
  const auto c0 = static_cast<Eigen::Index>(i);
  return (w.d00 * mesh.values.col(c0) + w.d01 * mesh.values.col(c0 + 1)) / h + w.d10 * slopes.col(c0) +
         w.d11 * slopes.col(c0 + 1);
}

BVPSolution make_solution(const BVProblem& problem, const Mesh& mesh) {
  BVPSolution solution;
  solution.mesh = mesh;
  solution.slopes = node_slopes(problem, mesh);
  solution.residual_norm = residual_norm(problem, mesh);
  solution.status = SolveStatus::NoConvergence;
  return solution;
}

double residual_norm(const BVProblem& problem, const Mesh& mesh) {
  const Collocation col(problem, mesh.nodes);
  const auto sys = col.evaluate(mesh.values, mesh.params);
  const auto [c, b] = col.norms(sys);
  return std::max(c, b);
}

std::vector<double> interval_residuals(const BVProblem& problem, const BVPSolution& solution) {
  const auto& nodes = solution.mesh.nodes;
  const int n = problem.dimension;
  std::vector<double> out(nodes.size() - 1);
  Vector f(n);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double h = nodes[i + 1] - nodes[i];
    double sum[3];
    const double ts[3] = {0.5, 0.5 - kInnerOffset, 0.5 + kInnerOffset};
    for (int s = 0; s < 3; ++s) {
      const double tau = nodes[i] + ts[s] * h;
      const Hermite w(ts[s]);
      const auto c0 = static_cast<Eigen::Index>(i);
      const Vector y = w.h00 * solution.mesh.values.col(c0) + w.h10 * h * solution.slopes.col(c0) +
                       w.h01 * solution.mesh.values.col(c0 + 1) + w.h11 * h * solution.slopes.col(c0 + 1);
      const Vector dy = (w.d00 * solution.mesh.values.col(c0) + w.d01 * solution.mesh.values.col(c0 + 1)) / h +
                        w.d10 * solution.slopes.col(c0) + w.d11 * solution.slopes.col(c0 + 1);
      eval_ode(problem, tau, y, solution.mesh.params, f);
      sum[s] = ((dy - f).array() / (1.0 + f.array().abs())).square().sum();
    }
    out[i] = std::sqrt(0.5 * (32.0 / 45.0 * sum[0] + 49.0 / 90.0 * (sum[1] + sum[2])));
  }
  return out;
}

BVPSolution solve(const BVProblem& problem, const Mesh& guess, const SolverOptions& options) {
  problem.validate();
  guess.validate(problem.dimension, problem.n_params, options.max_nodes);

  BVPSolution current;
  current.mesh = guess;
  auto fail = [&](SolveStatus status, std::string message) {
    current.status = status;
    current.message = std::move(message);
    log::debug("bvp: {} ({})", to_string(status), current.message);
    return current;
  };

  try {
    current.slopes = node_slopes(problem, current.mesh);
    const auto residuals = interval_residuals(problem, current);
    const double mesh_residual = *std::max_element(residuals.begin(), residuals.end());
    if (mesh_residual <= options.mesh_tolerance) {
      const Collocation col(problem, current.mesh.nodes);
      const auto [c, b] = col.norms(col.evaluate(current.mesh.values, current.mesh.params));
      if (c <= options.tolerance && b <= options.bc_tolerance) {
        current.residual_norm = std::max(c, b);
        current.max_mesh_residual = mesh_residual;
        current.status = SolveStatus::Converged;
        return current;
      }
    }
    if (options.coarsen && current.mesh.size() > 64) {
      auto nodes = coarsened_nodes(current.mesh.nodes, residuals, options.mesh_tolerance);
      if (nodes.size() < current.mesh.size()) {
        log::trace("bvp: coarsened mesh {} -> {}", current.mesh.size(), nodes.size());
        current.mesh = resample(current, std::move(nodes));
      }
    }
  } catch (const EvaluationRejected& e) {
    return fail(SolveStatus::EvaluationRejected, e.what());
  }

  int failed_passes = 0;
  for (int pass = 0; pass < options.max_mesh_passes; ++pass) {
    current.mesh_passes = pass + 1;
    const Collocation col(problem, current.mesh.nodes);
    const auto nr = newton(col, current.mesh.values, current.mesh.params, options, options.max_newton_iterations);
    current.newton_iterations += nr.iterations;
    current.residual_norm = nr.residual;
    if (nr.outcome == NewtonOutcome::Rejected) {
      return fail(SolveStatus::EvaluationRejected, "initial guess outside the admissible region");
    }

    std::vector<double> residuals;
    try {
      current.slopes = node_slopes(problem, current.mesh);
      residuals = interval_residuals(problem, current);
    } catch (const EvaluationRejected& e) {
      return fail(nr.outcome == NewtonOutcome::Converged ? SolveStatus::EvaluationRejected
                                                         : SolveStatus::NoConvergence,
                  e.what());
    }
    current.max_mesh_residual = *std::max_element(residuals.begin(), residuals.end());
    if (!std::isfinite(current.max_mesh_residual)) {
      return fail(SolveStatus::NoConvergence, "non-finite residual");
    }
    log::trace("bvp: pass {} nodes {} newton {} residual {:.3e} mesh residual {:.3e}", pass, current.mesh.size(),
               nr.iterations, nr.residual, current.max_mesh_residual);

    if (nr.outcome == NewtonOutcome::Converged) {
      failed_passes = 0;
      if (current.max_mesh_residual <= options.mesh_tolerance) {
        current.status = SolveStatus::Converged;
        current.message.clear();
        return current;
      }
    } else if (++failed_passes > kMaxFailedNewtonPasses) {
      return fail(SolveStatus::NoConvergence, "newton iteration did not converge");
    }

    bool changed = false;
    auto nodes = refined_nodes(current.mesh.nodes, residuals, options.mesh_tolerance, changed);
    if (!changed) {
      return fail(SolveStatus::NoConvergence, "mesh cannot be refined further");
    }
    if (nodes.size() > options.max_nodes) {
      return fail(SolveStatus::MeshCapExceeded, "refinement needs " + std::to_string(nodes.size()) + " nodes");
    }
    current.mesh = resample(current, std::move(nodes));
  }
  return fail(SolveStatus::NoConvergence, "mesh pass limit reached");
}

} // namespace marsutm::bvp
