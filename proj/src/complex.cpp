#include "tariff/complex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tariff {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

AffineForm zero_form(int n) { return {VectorXd::Zero(n), 0.0}; }

AffineForm operator+(AffineForm a, const AffineForm& b) {
  a.grad += b.grad;
  a.constant += b.constant;
  return a;
}
AffineForm operator-(AffineForm a, const AffineForm& b) {
  a.grad -= b.grad;
  a.constant -= b.constant;
  return a;
}
AffineForm operator*(double k, AffineForm a) {
  a.grad *= k;
  a.constant *= k;
  return a;
}

std::vector<int> active_options(const Pattern& p, int s) {
  std::vector<int> out;
  for (int w = 0; w < p.options(); ++w)
    if (p.active(s, w)) out.push_back(w);
  return out;
}

void check_pattern_shape(const Instance& inst, const Pattern& p) {
  if (p.segments() != inst.S || p.options() != inst.W + 1)
    throw std::invalid_argument("pattern shape does not match instance (S x (W+1))");
}

double row_value(const CellRow& r, const Eigen::Ref<const VectorXd>& x) {
  return r.lhs(x);
}

// Tolerance scaled by the row magnitude so that kWh-scale rows are judged
// consistently with unit-scale ones.
double row_tol(const CellRow& r, double tol) {
  return tol * std::max(1.0, r.lhs.grad.cwiseAbs().maxCoeff());
}

}  // namespace

bool CellSystem::contains(const PriceVector& x, double tol) const {
  auto flat = x.flat();
  for (const auto& r : rows) {
    double v = row_value(r, flat);
    double t = row_tol(r, tol);
    if (r.equality ? std::abs(v) > t : v > t) return false;
  }
  return true;
}

bool CellSystem::contains_open(const PriceVector& x, double tol) const {
  auto flat = x.flat();
  for (const auto& r : rows) {
    double v = row_value(r, flat);
    if (r.equality) {
      if (std::abs(v) > row_tol(r, kFeasTol)) return false;
    } else if (r.strict) {
      if (v >= -tol) return false;
    } else if (v > row_tol(r, kFeasTol)) {
      return false;
    }
  }
  return true;
}

QpProblem CellSystem::constraints(int price_dim) const {
  QpProblem qp = QpProblem::with_dim(price_dim);
  for (const auto& r : rows) {
    if (r.equality)
      qp.add_equality(r.lhs.grad, -r.lhs.constant);
    else
      qp.add_inequality(r.lhs.grad, -r.lhs.constant);
  }
  return qp;
}

std::vector<CellRow> polytope_rows(const Instance& inst) {
  const int n = inst.price_dim();
  std::vector<CellRow> rows;
  for (int w = 0; w < inst.W; ++w)
    for (int h = 0; h < inst.H; ++h) {
      int i = w * inst.H + h;
      CellRow up{zero_form(n)};
      up.lhs.grad(i) = 1.0;
      up.lhs.constant = -inst.X.upper(w, h);
      CellRow lo{zero_form(n)};
      lo.lhs.grad(i) = -1.0;
      lo.lhs.constant = inst.X.lower(w, h);
      rows.push_back(std::move(up));
      rows.push_back(std::move(lo));
    }
  for (const auto& e : inst.X.extra) {
    CellRow r{zero_form(n)};
    r.lhs.grad = Eigen::Map<const VectorXd>(e.g.data(), n);
    r.lhs.constant = -e.h;
    rows.push_back(std::move(r));
  }
  return rows;
}

CellSystem cell_system(const Instance& inst, const Pattern& pattern, const Beta& beta) {
  check_pattern_shape(inst, pattern);
  const int n = inst.price_dim();
  CellSystem sys{pattern, beta, {}};
  for (int s = 0; s < inst.S; ++s) {
    const auto act = active_options(pattern, s);
    const double k = static_cast<double>(act.size());
    const double two_inv = 2.0 * beta.inverse(s);
    AffineForm sum_active = zero_form(n);
    for (int w : act) sum_active = sum_active + disutility_form(inst, s, w);
    for (int w = 0; w <= inst.W; ++w) {
      AffineForm v = disutility_form(inst, s, w);
      CellRow r;
      r.segment = s;
      r.option = w;
      if (pattern.active(s, w)) {
        // |A_s| V_sw <= 2/beta + sum_active  (strict in the open region)
        r.lhs = k * v - sum_active;
        r.lhs.constant -= two_inv;
        r.side = RowSide::active;
        r.strict = true;
      } else {
        // |A_s| V_sw >= 2/beta + sum_active
        r.lhs = sum_active - k * v;
        r.lhs.constant += two_inv;
        r.side = RowSide::inactive;
      }
      sys.rows.push_back(std::move(r));
    }
  }
  for (auto& r : polytope_rows(inst)) sys.rows.push_back(std::move(r));
  return sys;
}

CellSystem asymptotic_cell_system(const Instance& inst, const Pattern& pattern) {
  check_pattern_shape(inst, pattern);
  CellSystem sys{pattern, Beta::infinite(), {}};
  for (int s = 0; s < inst.S; ++s) {
    const auto act = active_options(pattern, s);
    const int ref = act.front();
    AffineForm vref = disutility_form(inst, s, ref);
    for (int w = 0; w <= inst.W; ++w) {
      if (w == ref) continue;
      CellRow r;
      r.segment = s;
      r.option = w;
      AffineForm v = disutility_form(inst, s, w);
      if (pattern.active(s, w)) {
        r.lhs = v - vref;
        r.equality = true;
        r.side = RowSide::active;
      } else {
        r.lhs = vref - v;
        r.side = RowSide::inactive;
        r.strict = true;
      }
      sys.rows.push_back(std::move(r));
    }
  }
  for (auto& r : polytope_rows(inst)) sys.rows.push_back(std::move(r));
  return sys;
}

Pattern pattern_of(const Instance& inst, const PriceVector& x, const Beta& beta,
                   double active_tol) {
  auto resp = quad_response(inst, x, beta);
  std::vector<std::vector<int>> rows(inst.S, std::vector<int>(inst.W + 1, 0));
  for (int s = 0; s < inst.S; ++s)
    for (int w = 0; w <= inst.W; ++w)
      rows[s][w] = resp.response.ybar(s, w) > active_tol ? 1 : 0;
  return Pattern(rows);
}

FeasibilityResult is_feasible(const Instance& inst, const CellSystem& system,
                              const std::optional<PriceVector>& warm) {
  QpProblem qp = system.constraints(inst.price_dim());
  std::optional<VectorXd> start;
  if (warm) start = VectorXd(warm->flat());
  QpSolution sol = find_feasible_point(qp, start);
  FeasibilityResult out;
  out.feasible = sol.optimal();
  if (out.feasible) out.witness = PriceVector::from_flat(sol.z, inst.W, inst.H);
  return out;
}

FeasibilityResult is_feasible(const Instance& inst, const Pattern& pattern,
                              const Beta& beta, const std::optional<PriceVector>& warm) {
  return is_feasible(inst, cell_system(inst, pattern, beta), warm);
}

double CellQP::value(const PriceVector& x) const {
  auto f = x.flat();
  return 0.5 * f.dot(Q * f) + c.dot(f) + constant;
}

double CellQP::min_eig_of_negated_hessian() const {
  if (Q.size() == 0) return 0.0;
  MatrixXd negQ = -0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(negQ, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CellQP cell_qp_unchecked(const Instance& inst, const Pattern& pattern, const Beta& beta) {
  check_pattern_shape(inst, pattern);
  beta.check();
  const int n = inst.price_dim();
  CellQP out{pattern, beta, MatrixXd::Zero(n, n), VectorXd::Zero(n), 0.0, {}, {}, {}};
  for (int s = 0; s < inst.S; ++s) {
    const auto act = active_options(pattern, s);
    const double k = static_cast<double>(act.size());
    const double b = beta.for_segment(s);
    AffineForm level = zero_form(n);  // the multiplier c_{s,|A_s|}
    for (int w : act) level = level + disutility_form(inst, s, w);
    level.constant += 2.0 / b;
    level = (1.0 / k) * level;

    MatrixXd Qs = MatrixXd::Zero(n, n);
    VectorXd cs = VectorXd::Zero(n);
    double ks = 0.0;
    for (int w : act) {
      if (w == 0) continue;
      AffineForm prob = (0.5 * b) * (level - disutility_form(inst, s, w));
      AffineForm margin = margin_form(inst, s, w);
      // (m.x + q)(a.x + r): Hessian m a' + a m'.
      Qs += margin.grad * prob.grad.transpose() + prob.grad * margin.grad.transpose();
      cs += margin.constant * prob.grad + prob.constant * margin.grad;
      ks += margin.constant * prob.constant;
    }
    const double rho = inst.rho(s);
    out.segment_Q.push_back(rho * Qs);
    out.segment_c.push_back(rho * cs);
    out.segment_constant.push_back(rho * ks);
    out.Q += rho * Qs;
    out.c += rho * cs;
    out.constant += rho * ks;
  }
  return out;
}

CellQP cell_qp(const Instance& inst, const Pattern& pattern, const Beta& beta) {
  if (!is_feasible(inst, pattern, beta).feasible)
    throw std::invalid_argument("cell_qp: infeasible pattern " + pattern.to_string());
  return cell_qp_unchecked(inst, pattern, beta);
}

std::optional<CellOptimum> solve_cell(const Instance& inst, const Pattern& pattern,
                                      const Beta& beta,
                                      const std::optional<PriceVector>& warm) {
  CellQP cq = cell_qp_unchecked(inst, pattern, beta);
  QpProblem qp = cell_system(inst, pattern, beta).constraints(inst.price_dim());
  qp.Q = -0.5 * (cq.Q + cq.Q.transpose());
  qp.c = -cq.c;
  std::optional<VectorXd> start;
  if (warm) start = VectorXd(warm->flat());
  QpSolution sol = solve_qp(qp, start);
  if (sol.status == QpStatus::infeasible) return std::nullopt;
  CellOptimum out;
  out.x = PriceVector::from_flat(sol.z, inst.W, inst.H);
  out.value = cq.value(out.x);
  return out;
}

std::optional<CellOptimum> solve_asymptotic_cell(const Instance& inst,
                                                 const Pattern& pure_pattern) {
  if (!pure_pattern.is_pure())
    throw std::invalid_argument("solve_asymptotic_cell: pattern must be pure");
  const int n = inst.price_dim();
  QpProblem qp = asymptotic_cell_system(inst, pure_pattern).constraints(n);
  double constant = 0.0;
  for (int s = 0; s < inst.S; ++s) {
    for (int w = 1; w <= inst.W; ++w) {
      if (!pure_pattern.active(s, w)) continue;
      AffineForm m = margin_form(inst, s, w);
      qp.c -= inst.rho(s) * m.grad;
      constant += inst.rho(s) * m.constant;
    }
  }
  QpSolution sol = solve_qp(qp);
  if (sol.status == QpStatus::infeasible) return std::nullopt;
  CellOptimum out;
  out.x = PriceVector::from_flat(sol.z, inst.W, inst.H);
  out.value = -qp.c.dot(sol.z) + constant;
  return out;
}

std::vector<NeighborMove> neighbors(const Instance& inst, const Pattern& pattern,
                                    const Beta& /*beta*/, const PriceVector& x_current) {
  check_pattern_shape(inst, pattern);
  std::vector<NeighborMove> out;
  for (int s = 0; s < inst.S; ++s) {
    VectorXd V = disutility(inst, s, x_current);
    NeighborMove mv;
    mv.segment = s;
    const int k = pattern.row_count(s);
    for (int w = 0; w <= inst.W; ++w) {
      if (pattern.active(s, w)) {
        if (mv.worst_active < 0 || V(w) > V(mv.worst_active)) mv.worst_active = w;
      } else if (mv.best_inactive < 0 || V(w) < V(mv.best_inactive)) {
        mv.best_inactive = w;
      }
    }
    if (k > 1) mv.minus = pattern.flipped(s, mv.worst_active);
    else mv.worst_active = -1;
    if (k < inst.W + 1) mv.plus = pattern.flipped(s, mv.best_inactive);
    out.push_back(std::move(mv));
  }
  return out;
}

std::optional<InteriorPoint> chebyshev_center(const Instance& inst,
                                              const CellSystem& system) {
  const int n = inst.price_dim();
  QpProblem qp = QpProblem::with_dim(n + 1);
  for (const auto& r : system.rows) {
    VectorXd a = VectorXd::Zero(n + 1);
    a.head(n) = r.lhs.grad;
    if (r.equality) {
      qp.add_equality(a, -r.lhs.constant);
      continue;
    }
    const double nrm = r.lhs.grad.norm();
    if (nrm == 0.0) {
      if (r.lhs.constant > 0.0) return std::nullopt;
      continue;
    }
    a(n) = nrm;
    qp.add_inequality(a, -r.lhs.constant);
  }
  VectorXd rneg = VectorXd::Zero(n + 1);
  rneg(n) = -1.0;
  qp.add_inequality(rneg, 0.0);  // r >= 0
  qp.c(n) = -1.0;
  QpSolution sol = solve_qp(qp);
  if (!sol.optimal()) return std::nullopt;
  return InteriorPoint{PriceVector::from_flat(sol.z.head(n), inst.W, inst.H), sol.z(n)};
}

}  // namespace tariff
