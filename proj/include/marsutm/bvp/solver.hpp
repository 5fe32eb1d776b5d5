#ifndef MARSUTM_BVP_SOLVER_HPP
#define MARSUTM_BVP_SOLVER_HPP

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Two-point boundary-value solver for y' = f(tau, y, p) on tau in [0, 1] with
// unknown parameters p. Uses three-stage Lobatto IIIA collocation (the
// Simpson/Hermite-cubic scheme), a damped Newton iteration with the
// affine-invariant monotonicity test, and adaptive mesh refinement that
// splits intervals until the continuous residual of the C1 cubic interpolant
// is below the mesh tolerance.

namespace marsutm::bvp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;

/// Thrown by problem callbacks when a trial point is outside the domain where
/// the right-hand side is defined. The solver backs off instead of failing.
class EvaluationRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BVProblem {
  int dimension = 0;
  int n_params = 0;
  /// dy/dtau written into the last argument.
  std::function<void(double, ConstVectorRef, ConstVectorRef, VectorRef)> ode;
  /// dimension + n_params residuals of (y(0), y(1), p).
  std::function<void(ConstVectorRef, ConstVectorRef, ConstVectorRef, VectorRef)> boundary;

  void validate() const;
};

struct Mesh {
  std::vector<double> nodes;
  Matrix values; // dimension x nodes.size()
  Vector params;

  std::size_t size() const { return nodes.size(); }
  int dimension() const { return static_cast<int>(values.rows()); }

  static Mesh uniform(std::size_t count, int dimension, const Vector& params);

  /// Throws std::invalid_argument if the invariants do not hold.
  void validate(int dimension, int n_params, std::size_t max_nodes) const;
};

struct SolverOptions {
  double tolerance = 1e-6;      // discrete collocation residual, relative to 1 + |f|
  double bc_tolerance = 1e-8;   // boundary residuals, absolute
  double mesh_tolerance = 1e-4; // rms continuous residual per interval, relative to 1 + |f|
  int max_newton_iterations = 50;
  std::size_t max_nodes = 5000;
  double jacobian_step = 1e-7;
  bool coarsen = true;
  int max_mesh_passes = 60;

  bool operator==(const SolverOptions&) const = default;
};

enum class SolveStatus {
  Converged,
  NoConvergence,
  MeshCapExceeded,
  EvaluationRejected,
};

std::string to_string(SolveStatus status);

class BVPSolution {
 public:
  Mesh mesh;
  Matrix slopes; // f at the nodes; defines the C1 Hermite interpolant
  SolveStatus status = SolveStatus::NoConvergence;
  double residual_norm = 0.0;
  double max_mesh_residual = 0.0;
  int newton_iterations = 0;
  int mesh_passes = 0;
  std::string message;

  bool converged() const { return status == SolveStatus::Converged; }
  const Vector& params() const { return mesh.params; }

  /// Interpolated state; throws std::out_of_range outside [0, 1].
  Vector evaluate(double tau) const;
  Vector derivative(double tau) const;
};

BVPSolution solve(const BVProblem& problem, const Mesh& guess, const SolverOptions& options = {});

/// Builds the interpolant for an existing mesh without solving. Throws
/// EvaluationRejected if the right-hand side cannot be evaluated on it.
BVPSolution make_solution(const BVProblem& problem, const Mesh& mesh);

inline Vector evaluate(const BVPSolution& solution, double tau) { return solution.evaluate(tau); }

/// Max-norm over scaled collocation residuals |r|/(h (1 + |f_mid|)) and raw
/// boundary residuals.
double residual_norm(const BVProblem& problem, const Mesh& mesh);

inline double residual_norm(const BVPSolution& solution) { return solution.residual_norm; }

/// Per-interval rms residual of the interpolant (the refinement criterion).
std::vector<double> interval_residuals(const BVProblem& problem, const BVPSolution& solution);

} // namespace marsutm::bvp

#endif
