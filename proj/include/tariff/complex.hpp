#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tariff/model.hpp"
#include "tariff/response.hpp"
#include "tariff/subqp.hpp"

namespace tariff {

inline constexpr double kActiveTol = 1e-10;

enum class RowSide { inactive, active, polytope };

/// One row `lhs(x) <= 0` (or `== 0` when equality is set) of a cell system.
struct CellRow {
  AffineForm lhs;
  RowSide side = RowSide::polytope;
  int segment = -1;
  int option = -1;
  /// Strict in the open unique-pattern region; always solved as non-strict.
  bool strict = false;
  bool equality = false;
};

/// Linear description of the closed cell of a pattern, polytope rows included.
struct CellSystem {
  Pattern pattern;
  Beta beta;
  std::vector<CellRow> rows;

  bool contains(const PriceVector& x, double tol = kFeasTol) const;
  /// Every strict row holds strictly and all others hold (classification).
  bool contains_open(const PriceVector& x, double tol = 0.0) const;
  /// Constraint-only QP over the flat price vector (objective left zero).
  QpProblem constraints(int price_dim) const;
};

/// Rows of the polytope X as `lhs(x) <= 0`.
std::vector<CellRow> polytope_rows(const Instance& inst);

/// Inequalities of the closed cell. For an infinite beta the 2/beta term is
/// dropped, giving the deterministic limit system.
CellSystem cell_system(const Instance& inst, const Pattern& pattern,
                       const Beta& beta);

/// Equivalent description of the deterministic limit cell: active options
/// share one disutility, inactive ones are no better.
CellSystem asymptotic_cell_system(const Instance& inst, const Pattern& pattern);

/// Active set of the regularised response at x.
Pattern pattern_of(const Instance& inst, const PriceVector& x, const Beta& beta,
                   double active_tol = kActiveTol);

struct FeasibilityResult {
  bool feasible = false;
  PriceVector witness;
};

FeasibilityResult is_feasible(const Instance& inst, const Pattern& pattern,
                              const Beta& beta,
                              const std::optional<PriceVector>& warm = {});
FeasibilityResult is_feasible(const Instance& inst, const CellSystem& system,
                              const std::optional<PriceVector>& warm = {});

/// Profit restricted to a cell: value(x) = 1/2 x'Qx + c'x + constant, with
/// Q negative semidefinite. segment_* hold the rho-weighted per-segment parts.
struct CellQP {
  Pattern pattern;
  Beta beta;
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  double constant = 0.0;
  std::vector<Eigen::MatrixXd> segment_Q;
  std::vector<Eigen::VectorXd> segment_c;
  std::vector<double> segment_constant;

  double value(const PriceVector& x) const;
  /// Smallest eigenvalue of -Q (>= 0 up to rounding when concave).
  double min_eig_of_negated_hessian() const;
};

/// Throws std::invalid_argument when the pattern's cell is empty.
CellQP cell_qp(const Instance& inst, const Pattern& pattern, const Beta& beta);

/// Same expansion without the feasibility check.
CellQP cell_qp_unchecked(const Instance& inst, const Pattern& pattern,
                         const Beta& beta);

struct CellOptimum {
  PriceVector x;
  double value = 0.0;
};

/// Maximises the cell profit over the closed cell; nullopt when empty.
std::optional<CellOptimum> solve_cell(const Instance& inst, const Pattern& pattern,
                                      const Beta& beta,
                                      const std::optional<PriceVector>& warm = {});

/// Deterministic-limit counterpart for a pure pattern: maximises the linear
/// profit of the chosen options over the asymptotic cell.
std::optional<CellOptimum> solve_asymptotic_cell(const Instance& inst,
                                                 const Pattern& pure_pattern);

struct NeighborMove {
  int segment = 0;
  int worst_active = -1;   // option dropped in `minus`
  int best_inactive = -1;  // option added in `plus`
  std::optional<Pattern> minus;
  std::optional<Pattern> plus;
};

/// Pivot candidates of every segment around x_current.
std::vector<NeighborMove> neighbors(const Instance& inst, const Pattern& pattern,
                                    const Beta& beta, const PriceVector& x_current);

struct InteriorPoint {
  PriceVector x;
  double radius = 0.0;  // largest ball around x inside every inequality row
};

/// Chebyshev centre of the inequality rows (equality rows are honoured).
std::optional<InteriorPoint> chebyshev_center(const Instance& inst,
                                              const CellSystem& system);

}  // namespace tariff
