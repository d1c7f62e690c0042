#pragma once

/**
 * @file convex.hpp
 * @brief Convex subproblems produced by sequential convexification.
 *
 *   minimize    1/2 x'Px + q'x + r
 *   subject to  A x  = b
 *               G x <= h
 *               1/2 x'Q_k x + g_k'x + c_k <= 0      (Q_k PSD)
 *               lower <= x <= upper
 *
 * solved with a primal-dual interior point method on the sparse reduced KKT
 * system. Quadratic constraints enter the Newton system natively; their
 * rank-one barrier terms are folded back in with a Woodbury update so the
 * sparse factorization keeps the banded pattern of the trajectory problem.
 */

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace socnav {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct QuadraticConstraint {
  SparseMatrix Q;  ///< symmetric PSD, enters as 1/2 x'Qx
  Eigen::VectorXd g;
  double c = 0.0;
  std::string label;

  double value(const Eigen::VectorXd& x) const;
};

struct ConvexProgram {
  SparseMatrix P;
  Eigen::VectorXd q;
  double constant = 0.0;

  SparseMatrix A;
  Eigen::VectorXd b;

  SparseMatrix G;
  Eigen::VectorXd h;

  std::vector<QuadraticConstraint> quadratic;

  /// Entries may be +-infinity.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Optional per-variable names, used only by the debug dump.
  std::vector<std::string> variable_names;

  explicit ConvexProgram(int num_variables = 0);

  int num_variables() const { return static_cast<int>(q.size()); }
  double objective(const Eigen::VectorXd& x) const;

  /// Dimension, symmetry and PSD checks (smallest eigenvalue >= -1e-8).
  /// Throws std::invalid_argument describing the first violation.
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kMaxIterations, kNumericFailure };

const char* to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::kNumericFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double max_violation = 0.0;
  /// Complementarity s'z at the returned point.
  double duality_gap = 0.0;
  int iterations = 0;
  Eigen::VectorXd equality_duals;
  /// Duals of G rows, then finite bounds (lower then upper), then quadratic constraints.
  Eigen::VectorXd inequality_duals;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolverSettings {
  double tolerance = 1e-6;
  int max_iterations = 200;
  bool check_convexity = true;
};

SolveResult solve(const ConvexProgram& program, const std::optional<Eigen::VectorXd>& warm_start,
                  const SolverSettings& settings = {});

inline SolveResult solve(const ConvexProgram& program, const std::optional<Eigen::VectorXd>& warm_start,
                         double tol) {
  SolverSettings settings;
  settings.tolerance = tol;
  return solve(program, warm_start, settings);
}

/// Signed violations per constraint class; values <= 0 mean satisfied.
struct FeasibilityReport {
  double equality = 0.0;    ///< max |Ax - b| (never negative)
  double inequality = 0.0;  ///< max (Gx - h)
  double quadratic = 0.0;   ///< max quadratic constraint value
  double bounds = 0.0;      ///< max (lower - x, x - upper)

  double max() const;
};

/// Throws std::invalid_argument on dimension mismatch.
FeasibilityReport check_feasibility(const ConvexProgram& program, const Eigen::VectorXd& point);

/// Writes a self-describing JSON document with every matrix in triplet form.
void dump(const ConvexProgram& program, std::ostream& out);

}  // namespace socnav
