#include "tariff/response.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tariff/subqp.hpp"

namespace tariff {

void Beta::check() const {
  if (!(value > 0.0)) throw std::invalid_argument("beta must be > 0");
  for (double d : scale)
    if (!(d > 0.0) || !std::isfinite(d))
      throw std::invalid_argument("per-segment beta scale must be > 0");
}

QuadResponseDetail quad_response_row(const Eigen::VectorXd& V, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("quad_response: beta must be finite and > 0");
  const int n = static_cast<int>(V.size());
  QuadResponseDetail d;
  d.order.resize(n);
  std::iota(d.order.begin(), d.order.end(), 0);
  std::stable_sort(d.order.begin(), d.order.end(),
                   [&V](int a, int b) { return V(a) < V(b); });

  // Work relative to the smallest disutility to avoid cancellation at large beta.
  const double base = V(d.order[0]);
  std::vector<double> vs(n);
  for (int k = 0; k < n; ++k) vs[k] = V(d.order[k]) - base;

  const double two_over_beta = 2.0 / beta;
  double prefix = vs[0];
  int tau = n;
  double c = 0.0;
  for (int k = 1; k < n; ++k) {
    double ck = (two_over_beta + prefix) / k;
    if (vs[k] >= ck) {
      tau = k;
      c = ck;
      break;
    }
    prefix += vs[k];
  }
  if (tau == n) c = (two_over_beta + prefix) / n;

  d.tau = tau;
  d.mu = c + base;
  d.ybar = Eigen::VectorXd::Zero(n);
  d.lambda = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    int w = d.order[k];
    if (k < tau)
      d.ybar(w) = 0.5 * beta * (c - vs[k]);
    else
      d.lambda(w) = vs[k] - c;
  }
  if (tau == 1) d.ybar(d.order[0]) = 1.0;
  return d;
}

double kkt_residual(const Eigen::VectorXd& V, double beta,
                    const QuadResponseDetail& d) {
  const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
  double res = std::abs(d.ybar.sum() - 1.0);
  for (int w = 0; w < V.size(); ++w) {
    double stat = V(w) + 2.0 / beta * d.ybar(w) - d.lambda(w) - d.mu;
    res = std::max(res, std::abs(stat) / scale);
    res = std::max(res, std::abs(d.ybar(w) * d.lambda(w)) / scale);
    res = std::max(res, -d.ybar(w));
    res = std::max(res, -d.lambda(w) / scale);
  }
  return res;
}

QuadResponse quad_response(const Instance& inst, const PriceVector& x,
                           const Beta& beta) {
  beta.check();
  QuadResponse out;
  out.response.ybar.resize(inst.S, inst.W + 1);
  out.detail.reserve(inst.S);
  for (int s = 0; s < inst.S; ++s) {
    out.detail.push_back(quad_response_row(disutility(inst, s, x), beta.for_segment(s)));
    out.response.ybar.row(s) = out.detail.back().ybar.transpose();
  }
  return out;
}

double profit_of(const Instance& inst, const PriceVector& x, const ResponseMatrix& y) {
  double total = 0.0;
  for (int s = 0; s < inst.S; ++s) {
    double seg = 0.0;
    for (int w = 0; w < inst.W; ++w)
      seg += (bill(inst, s, w, x) - inst.C(s, w)) * y.ybar(s, w + 1);
    total += inst.rho(s) * seg;
  }
  return total;
}

double quad_profit(const Instance& inst, const PriceVector& x, const Beta& beta) {
  return profit_of(inst, x, quad_response(inst, x, beta).response);
}

Eigen::VectorXd logit_row(const Eigen::VectorXd& V, double beta) {
  Eigen::ArrayXd a = -beta * V.array();
  a -= a.maxCoeff();
  a = a.exp();
  return (a / a.sum()).matrix();
}

ResponseMatrix logit_response(const Instance& inst, const PriceVector& x,
                              const Beta& beta) {
  beta.check();
  ResponseMatrix out;
  out.ybar.resize(inst.S, inst.W + 1);
  for (int s = 0; s < inst.S; ++s)
    out.ybar.row(s) = logit_row(disutility(inst, s, x), beta.for_segment(s)).transpose();
  return out;
}

double logit_profit(const Instance& inst, const PriceVector& x, const Beta& beta) {
  return profit_of(inst, x, logit_response(inst, x, beta));
}

DetResponse det_response_set(const Instance& inst, const PriceVector& x,
                             double tie_tol) {
  DetResponse out;
  out.argmin.resize(inst.S);
  out.choice.resize(inst.S);
  out.optimistic.ybar = Eigen::MatrixXd::Zero(inst.S, inst.W + 1);
  for (int s = 0; s < inst.S; ++s) {
    Eigen::VectorXd V = disutility(inst, s, x);
    const double vmin = V.minCoeff();
    int best = -1;
    double best_margin = 0.0;
    for (int w = 0; w <= inst.W; ++w) {
      if (V(w) > vmin + tie_tol) continue;
      out.argmin[s].push_back(w);
      double margin = w == 0 ? 0.0 : inst.rho(s) * (bill(inst, s, w - 1, x) - inst.C(s, w - 1));
      if (best < 0 || margin > best_margin) {
        best = w;
        best_margin = margin;
      }
    }
    out.choice[s] = best;
    out.optimistic.ybar(s, best) = 1.0;
  }
  return out;
}

double det_profit(const Instance& inst, const PriceVector& x, double tie_tol) {
  return profit_of(inst, x, det_response_set(inst, x, tie_tol).optimistic);
}

double qpcc_objective(const Instance& inst, const PriceVector& x, const Beta& beta,
                      const std::vector<QuadResponseDetail>& detail) {
  if (static_cast<int>(detail.size()) != inst.S)
    throw std::invalid_argument("qpcc_objective: one detail per segment required");
  double total = 0.0;
  for (int s = 0; s < inst.S; ++s) {
    const auto& d = detail[s];
    const double b = beta.for_segment(s);
    if (kkt_residual(disutility(inst, s, x), b, d) > 1e-6)
      throw std::runtime_error("qpcc_objective: stale response detail for segment " +
                               std::to_string(s));
    double seg = d.mu - 2.0 / b * d.ybar.squaredNorm();
    for (int w = 0; w < inst.W; ++w) seg += (inst.R(s, w) - inst.C(s, w)) * d.ybar(w + 1);
    total += inst.rho(s) * seg;
  }
  return total;
}

bool penalization_equivalence_check(const Eigen::VectorXd& V, double beta) {
  const double n = static_cast<double>(V.size());
  Eigen::VectorXd p = -0.5 * beta * V;
  // <y-1, y>: linear term -1/beta shifts p by +1/2.
  Eigen::VectorXd a = project_simplex((p.array() + 0.5).matrix());
  // ||y - 1/n||^2: shifts p by +1/n.
  Eigen::VectorXd b = project_simplex((p.array() + 1.0 / n).matrix());
  // ||y||^2.
  Eigen::VectorXd c = project_simplex(p);
  return (a - c).cwiseAbs().maxCoeff() <= 1e-8 && (b - c).cwiseAbs().maxCoeff() <= 1e-8;
}

}  // namespace tariff
