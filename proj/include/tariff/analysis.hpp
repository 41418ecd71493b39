#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tariff/bnb.hpp"
#include "tariff/model.hpp"
#include "tariff/qspc.hpp"
#include "tariff/response.hpp"

namespace tariff {

/// (1 + w e^{8/(w e)})^{-1}; requires w >= 1.
double gamma_bound(int w);
/// (W + 1 + w (e^{8/e} - 1))^{-1}; requires 1 <= w <= W.
double eta_bound(int W, int w);

/// Logit at beta against the quadratic response at beta' = beta e / 4.
/// Flags are indexed by the original option order; position 0 of the sorted
/// order is never constrained and always passes.
struct ComparisonReport {
  double beta = 0.0;
  double beta_prime = 0.0;
  Eigen::VectorXd quad;
  Eigen::VectorXd logit;
  std::vector<bool> forward_ok;   // quad zero => logit <= gamma
  std::vector<bool> converse_ok;  // logit <= eta => quad zero
  int violations = 0;
  double l1_distance = 0.0;

  bool all_pass() const { return violations == 0; }
};

ComparisonReport check_metric_estimates(const Eigen::VectorXd& V, double beta);

/// Long-format table with the column order param, model, beta, value.
struct SweepRow {
  double param = 0.0;
  std::string model;
  double beta = 0.0;  // +inf for the deterministic model
  double value = 0.0;
};

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows);

enum class ProfitModel { det, logit, quad };

struct SweepAxis {
  int contract = 0;   // 0-based contract w
  int attribute = 0;  // 0-based attribute h
  double lo = 0.0;
  double hi = 0.0;
};

/// Profit along one price coordinate, every other coordinate held at `base`.
/// Rows are ordered by grid point, then model (det, logit, quad), then beta.
std::vector<SweepRow> profit_sweep(const Instance& inst, const PriceVector& base,
                                   const SweepAxis& axis, int n_points,
                                   const std::vector<double>& betas,
                                   const std::vector<ProfitModel>& models);

/// Upper bound on |d pi_quad / dt| along the axis, valid on [lo, hi].
double quad_lipschitz_bound(const Instance& inst, const PriceVector& base,
                            const SweepAxis& axis, const Beta& beta);

enum class SweepMethod { qspc, bnb };

struct BetaSweepOptions {
  SweepMethod method = SweepMethod::qspc;
  QspcOptions qspc;
  SolveOptions bnb;
};

struct BetaSweepPoint {
  double beta = 0.0;
  double optimum = 0.0;         // best quad value found
  double logit_at_optimum = 0.0;
  double quad_at_det = 0.0;     // quad profit of the fixed deterministic prices
  PriceVector x;
};

/// The qspc search runs from the box midpoint and from det_prices and keeps
/// the better result, so optimum >= quad_at_det holds at every beta.
std::vector<BetaSweepPoint> beta_sweep(const Instance& inst, const std::vector<double>& betas,
                                       const PriceVector& det_prices,
                                       const BetaSweepOptions& opts = {});

std::vector<SweepRow> to_rows(const std::vector<BetaSweepPoint>& points);

/// Per consecutive pair of increasing betas b1 < b2: optimum(b1) >= optimum(b2) - tol.
std::vector<bool> beta_monotonicity_flags(const std::vector<BetaSweepPoint>& points,
                                          double tol = 1e-6);

}  // namespace tariff
