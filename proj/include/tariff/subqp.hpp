#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace tariff {

/// min 1/2 z'Qz + c'z  s.t.  A_in z <= b_in,  A_eq z = b_eq.
/// Q must be symmetric positive semidefinite; Q = 0 gives an LP.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;

  int dim() const { return static_cast<int>(c.size()); }

  /// Zero-initialised problem with n variables and no constraints.
  static QpProblem with_dim(int n);
  void add_inequality(const Eigen::VectorXd& a, double b);
  void add_equality(const Eigen::VectorXd& a, double b);
  double objective(const Eigen::VectorXd& z) const;
};

enum class QpStatus { optimal, infeasible, unbounded, max_iterations };

std::string_view to_string(QpStatus status);

struct QpSolution {
  Eigen::VectorXd z;
  double value = 0.0;
  QpStatus status = QpStatus::infeasible;
  /// Scaled stationarity/complementarity/feasibility residual at z.
  double kkt_residual = 0.0;
  int iterations = 0;
  Eigen::VectorXd lambda_in;  // multipliers of A_in rows, >= 0
  Eigen::VectorXd nu_eq;      // multipliers of A_eq rows

  bool optimal() const { return status == QpStatus::optimal; }
};

inline constexpr double kKktTol = 1e-9;

/// Primal active-set solver with a phase-1 feasibility LP. Handles
/// semidefinite Q through zero-curvature directions of the reduced Hessian.
/// Deterministic for identical inputs.
QpSolution solve_qp(const QpProblem& prob,
                    const std::optional<Eigen::VectorXd>& warm_start = {});

/// Any point of {A_in z <= b_in, A_eq z = b_eq}, or infeasible.
QpSolution find_feasible_point(
    const QpProblem& prob,
    const std::optional<Eigen::VectorXd>& warm_start = {});

/// Euclidean projection onto the probability simplex (sort-then-threshold).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& p);

}  // namespace tariff
