#include "tariff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tariff {
namespace {

constexpr double kE = 2.718281828459045235360287471352662;
constexpr double kQuadZero = 1e-12;
constexpr double kSlack = 1e-12;

const char* model_name(ProfitModel m) {
  switch (m) {
    case ProfitModel::det: return "det";
    case ProfitModel::logit: return "logit";
    case ProfitModel::quad: return "quad";
  }
  return "?";
}

}  // namespace

double gamma_bound(int w) {
  if (w < 1) throw std::invalid_argument("gamma_bound: w must be >= 1");
  const double wd = w;
  return 1.0 / (1.0 + wd * std::exp(8.0 / (wd * kE)));
}

double eta_bound(int W, int w) {
  if (w < 1 || w > W) throw std::invalid_argument("eta_bound: need 1 <= w <= W");
  return 1.0 / (W + 1.0 + w * (std::exp(8.0 / kE) - 1.0));
}

ComparisonReport check_metric_estimates(const Eigen::VectorXd& V, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("check_metric_estimates: beta must be > 0");
  const int n = static_cast<int>(V.size());
  ComparisonReport rep;
  rep.beta = beta;
  rep.beta_prime = beta * kE / 4.0;
  rep.quad = quad_response_row(V, rep.beta_prime).ybar;
  rep.logit = logit_row(V, beta);
  rep.forward_ok.assign(n, true);
  rep.converse_ok.assign(n, true);
  rep.l1_distance = (rep.quad - rep.logit).cwiseAbs().sum();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return V(a) < V(b); });
  const int W = n - 1;
  for (int pos = 1; pos < n; ++pos) {
    const int o = order[pos];
    if (rep.quad(o) == 0.0 && rep.logit(o) > gamma_bound(pos) + kSlack) rep.forward_ok[o] = false;
    if (rep.logit(o) <= eta_bound(W, pos) && rep.quad(o) > kQuadZero) rep.converse_ok[o] = false;
    rep.violations += (rep.forward_ok[o] ? 0 : 1) + (rep.converse_ok[o] ? 0 : 1);
  }
  return rep;
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "param,model,beta,value\n";
  os << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.param << ',' << r.model << ',';
    if (std::isinf(r.beta)) os << "inf";
    else os << r.beta;
    os << ',' << r.value << '\n';
  }
}

std::vector<SweepRow> profit_sweep(const Instance& inst, const PriceVector& base,
                                   const SweepAxis& axis, int n_points,
                                   const std::vector<double>& betas,
                                   const std::vector<ProfitModel>& models) {
  if (n_points < 2) throw std::invalid_argument("profit_sweep: need at least 2 points");
  if (axis.contract < 0 || axis.contract >= inst.W || axis.attribute < 0 ||
      axis.attribute >= inst.H)
    throw std::invalid_argument("profit_sweep: axis outside the price matrix");
  std::vector<ProfitModel> ordered;
  for (auto m : {ProfitModel::det, ProfitModel::logit, ProfitModel::quad})
    if (std::find(models.begin(), models.end(), m) != models.end()) ordered.push_back(m);

  std::vector<SweepRow> rows;
  PriceVector x = base;
  for (int i = 0; i < n_points; ++i) {
    const double t = axis.lo + (axis.hi - axis.lo) * i / (n_points - 1);
    x.x(axis.contract, axis.attribute) = t;
    for (auto m : ordered) {
      if (m == ProfitModel::det) {
        rows.push_back({t, model_name(m), std::numeric_limits<double>::infinity(),
                        det_profit(inst, x)});
        continue;
      }
      for (double b : betas) {
        double v = m == ProfitModel::logit ? logit_profit(inst, x, b) : quad_profit(inst, x, b);
        rows.push_back({t, model_name(m), b, v});
      }
    }
  }
  return rows;
}

double quad_lipschitz_bound(const Instance& inst, const PriceVector& base,
                            const SweepAxis& axis, const Beta& beta) {
  double L = 0.0;
  PriceVector lo = base, hi = base;
  lo.x(axis.contract, axis.attribute) = axis.lo;
  hi.x(axis.contract, axis.attribute) = axis.hi;
  for (int s = 0; s < inst.S; ++s) {
    const double e = inst.E[s](axis.contract, axis.attribute);
    // The margin vector is affine in t, so its norm peaks at an endpoint.
    double mnorm = 0.0;
    for (const PriceVector* p : {&lo, &hi}) {
      Eigen::VectorXd m(inst.W);
      for (int w = 0; w < inst.W; ++w) m(w) = bill(inst, s, w, *p) - inst.C(s, w);
      mnorm = std::max(mnorm, m.norm());
    }
    L += inst.rho(s) * (e + mnorm * 0.5 * beta.for_segment(s) * e);
  }
  return L;
}

std::vector<BetaSweepPoint> beta_sweep(const Instance& inst, const std::vector<double>& betas,
                                       const PriceVector& det_prices,
                                       const BetaSweepOptions& opts) {
  if (!inst.X.contains(det_prices))
    throw std::invalid_argument("beta_sweep: det_prices outside the price polytope");
  std::vector<BetaSweepPoint> out;
  for (double b : betas) {
    BetaSweepPoint pt;
    pt.beta = b;
    pt.quad_at_det = quad_profit(inst, det_prices, b);
    SolveReport rep = opts.method == SweepMethod::qspc ? qspc(inst, b, std::nullopt, opts.qspc)
                                                       : solve_quad(inst, b, opts.bnb);
    PriceVector x = rep.x;
    double v = rep.has_incumbent ? rep.objective : -std::numeric_limits<double>::infinity();
    SolveReport from_det = qspc(inst, b, det_prices, opts.qspc);
    if (from_det.objective > v) {
      v = from_det.objective;
      x = from_det.x;
    }
    pt.optimum = v;
    pt.x = x;
    pt.logit_at_optimum = logit_profit(inst, x, b);
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<SweepRow> to_rows(const std::vector<BetaSweepPoint>& points) {
  std::vector<SweepRow> rows;
  for (const auto& p : points) {
    rows.push_back({p.beta, "quad_opt", p.beta, p.optimum});
    rows.push_back({p.beta, "logit_at_quad_opt", p.beta, p.logit_at_optimum});
    rows.push_back({p.beta, "quad_at_det_prices", p.beta, p.quad_at_det});
  }
  return rows;
}

std::vector<bool> beta_monotonicity_flags(const std::vector<BetaSweepPoint>& points,
                                          double tol) {
  std::vector<const BetaSweepPoint*> sorted;
  for (const auto& p : points) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](auto* a, auto* b) { return a->beta < b->beta; });
  std::vector<bool> flags;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    flags.push_back(sorted[i - 1]->optimum >= sorted[i]->optimum - tol);
  return flags;
}

}  // namespace tariff
