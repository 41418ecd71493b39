#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "tariff/model.hpp"

namespace tariff {

/// Rationality parameter. Segment s responds with beta_s = scale[s] * value;
/// an empty scale vector means every d_s = 1. value = +inf is the
/// deterministic limit (only meaningful for cell systems).
struct Beta {
  double value = 1.0;
  std::vector<double> scale;

  Beta() = default;
  Beta(double b) : value(b) {}  // NOLINT(google-explicit-constructor)
  Beta(double b, std::vector<double> d) : value(b), scale(std::move(d)) {}

  static Beta infinite() { return Beta(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(value); }
  double for_segment(int s) const {
    return scale.empty() ? value : value * scale.at(static_cast<std::size_t>(s));
  }
  /// 1 / beta_s, exactly 0 in the deterministic limit.
  double inverse(int s) const { return is_infinite() ? 0.0 : 1.0 / for_segment(s); }

  /// Throws std::invalid_argument unless value > 0 and every d_s > 0.
  void check() const;
};

/// Closed-form solution of the regularised lower problem of one segment.
/// Vectors are indexed by the original option order (0 = no-purchase).
struct QuadResponseDetail {
  Eigen::VectorXd ybar;
  Eigen::VectorXd lambda;
  double mu = 0.0;
  /// Number of options with positive probability (tau in sorted order).
  int tau = 0;
  /// order[k] = original option at sorted position k (ascending V, stable).
  std::vector<int> order;
};

/// Response of one segment facing disutilities V (V[0] is no-purchase).
QuadResponseDetail quad_response_row(const Eigen::VectorXd& V, double beta);

/// Max stationarity / complementarity / sign violation of a detail against V.
double kkt_residual(const Eigen::VectorXd& V, double beta,
                    const QuadResponseDetail& detail);

struct QuadResponse {
  ResponseMatrix response;
  std::vector<QuadResponseDetail> detail;
};

QuadResponse quad_response(const Instance& inst, const PriceVector& x,
                           const Beta& beta);

/// Profit sum_s rho_s sum_w (theta_sw - C_sw) y_sw for a given response.
double profit_of(const Instance& inst, const PriceVector& x,
                 const ResponseMatrix& y);

double quad_profit(const Instance& inst, const PriceVector& x, const Beta& beta);

ResponseMatrix logit_response(const Instance& inst, const PriceVector& x,
                              const Beta& beta);
/// Logit row for a disutility vector (V[0] = 0 is no-purchase).
Eigen::VectorXd logit_row(const Eigen::VectorXd& V, double beta);

double logit_profit(const Instance& inst, const PriceVector& x, const Beta& beta);

inline constexpr double kTieTol = 1e-9;

struct DetResponse {
  /// Per segment, options within tie_tol of the minimum disutility.
  std::vector<std::vector<int>> argmin;
  /// Leader-favourable one-hot selection within each argmin set.
  ResponseMatrix optimistic;
  std::vector<int> choice;
};

DetResponse det_response_set(const Instance& inst, const PriceVector& x,
                             double tie_tol = kTieTol);

double det_profit(const Instance& inst, const PriceVector& x,
                  double tie_tol = kTieTol);

/// Objective of the complementarity reformulation evaluated on KKT data.
/// Throws std::runtime_error if any detail's KKT residual exceeds 1e-6.
double qpcc_objective(const Instance& inst, const PriceVector& x,
                      const Beta& beta,
                      const std::vector<QuadResponseDetail>& detail);

/// The three quadratic penalties <ybar-1, ybar>, ||ybar - 1/(W+1)||^2 and
/// ||ybar||^2 yield the same minimiser over the simplex (within 1e-8).
bool penalization_equivalence_check(const Eigen::VectorXd& V, double beta);

}  // namespace tariff
