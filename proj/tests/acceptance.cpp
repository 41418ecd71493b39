// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "tariff/analysis.hpp"
#include "tariff/bnb.hpp"
#include "tariff/complex.hpp"
#include "tariff/generator.hpp"
#include "tariff/qspc.hpp"
#include "tariff/report.hpp"
#include "tariff/response.hpp"
#include "tariff/subqp.hpp"

using namespace tariff;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double scaled(double v) { return std::max(1.0, std::abs(v)); }

/// Lower problem min <V, y> + (1/beta) <y - 1, y> over the simplex as a plain QP.
VectorXd lower_problem_qp(const VectorXd& V, double beta) {
  const int n = static_cast<int>(V.size());
  QpProblem qp = QpProblem::with_dim(n);
  qp.Q = (2.0 / beta) * Eigen::MatrixXd::Identity(n, n);
  qp.c = V - VectorXd::Constant(n, 1.0 / beta);
  for (int i = 0; i < n; ++i) qp.add_inequality(-VectorXd::Unit(n, i), 0.0);
  qp.add_equality(VectorXd::Ones(n), 1.0);
  return solve_qp(qp).z;
}

struct Draw {
  VectorXd V;
  double beta;
};

std::vector<Draw> projection_draws() {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> nw(1, 12);
  std::uniform_real_distribution<double> u(-5.0, 5.0), lb(-2.0, 2.0);
  std::vector<Draw> out;
  for (int k = 0; k < 1000; ++k) {
    VectorXd V(nw(rng) + 1);
    V(0) = 0.0;
    for (int i = 1; i < V.size(); ++i) V(i) = u(rng);
    out.push_back({V, std::pow(10.0, lb(rng))});
  }
  return out;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& d : projection_draws()) {
    VectorXd y = quad_response_row(d.V, d.beta).ybar;
    worst = std::max(worst, (y - project_simplex(-0.5 * d.beta * d.V)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (y - lower_problem_qp(d.V, d.beta)).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && t < 10.0, fmt("max deviation %.3g, %.2f s", worst, t)};
}

Outcome criterion2() {
  double worst = 0.0;
  for (const auto& d : projection_draws())
    worst = std::max(worst, kkt_residual(d.V, d.beta, quad_response_row(d.V, d.beta)));
  return {worst <= 1e-9, fmt("max KKT residual %.3g", worst)};
}

Outcome criterion3() {
  int bad = 0, total = 0;
  for (double beta : {0.01, 0.1, 0.5, 1.0, 2.0, 8.0, 100.0})
    for (int W = 1; W <= 6; ++W) {
      VectorXd V = VectorXd::Constant(W + 1, 2.0 / beta + 1.0);
      V(0) = 0.0;
      V(1) = 2.0 / beta;
      auto at = quad_response_row(V, beta);
      bool ok = at.ybar(0) == 1.0;
      for (int w = 1; w <= W; ++w) ok = ok && at.ybar(w) == 0.0;
      V(1) = 2.0 / beta - 1e-6;
      auto in = quad_response_row(V, beta);
      ok = ok && in.ybar(0) < 1.0 && in.ybar(1) > 0.0;
      bad += !ok;
      ++total;
    }
  return {bad == 0, fmt("%.0f of %.0f cases exact", total - bad, total)};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lb(-1.5, 1.5);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    Instance inst = oracle::random_instance(40000 + k, {1 + k % 3, 1 + k % 4, 1 + k % 2});
    PriceVector x = oracle::random_price(inst, rng);
    const double beta = std::pow(10.0, lb(rng));
    auto r = quad_response(inst, x, beta);
    worst = std::max(worst, std::abs(qpcc_objective(inst, x, beta, r.detail) -
                                     quad_profit(inst, x, beta)));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-8 && t < 30.0, fmt("max |qpcc - profit| %.3g, %.2f s", worst, t)};
}

Outcome criterion5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lb(-1.0, 1.0);
  int cells = 0, k = 0;
  double worst_eig = kInf, worst_val = 0.0;
  while (cells < 200) {
    Instance inst = oracle::random_instance(50000 + k, {1 + k % 3, 1 + (k / 3) % 3, 1 + k % 2});
    const double beta = std::pow(10.0, lb(rng));
    ++k;
    auto pats = oracle::all_patterns(inst.S, inst.W + 1);
    std::uniform_int_distribution<std::size_t> pick(0, pats.size() - 1);
    for (int tries = 0; tries < 4 && cells < 200; ++tries) {
      const Pattern& p = pats[pick(rng)];
      if (!is_feasible(inst, p, beta).feasible) continue;
      auto pts = oracle::interior_points(inst, p, beta, 100, rng);
      if (pts.empty()) continue;
      ++cells;
      CellQP cq = cell_qp(inst, p, beta);
      worst_eig = std::min(worst_eig, cq.min_eig_of_negated_hessian());
      for (const auto& x : pts)
        worst_val = std::max(worst_val, std::abs(cq.value(x) - quad_profit(inst, x, beta)));
    }
  }
  return {worst_eig >= -1e-9 && worst_val <= 1e-8,
          fmt("200 cells, min eig %.3g, max value error %.3g", worst_eig, worst_val)};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& inst : oracle::tiny_set()) {
    SolveReport rep = solve_quad(inst, 1.0, {1e-6});
    auto ref = oracle::best_over_patterns(inst, 1.0);
    double err = rep.has_incumbent ? std::abs(rep.objective - ref.value) / scaled(ref.value) : kInf;
    worst = std::max(worst, err);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && t < 300.0, fmt("max relative deviation %.3g, %.2f s", worst, t)};
}

Outcome criterion7() {
  double worst = 0.0;
  bool one_hot = true;
  for (const auto& inst : oracle::tiny_set()) {
    SolveReport rep = solve_det(inst, {1e-6});
    auto ref = oracle::best_over_pure_asymptotic(inst);
    worst = std::max(worst, rep.has_incumbent ? std::abs(rep.objective - ref.value) / scaled(ref.value)
                                              : kInf);
    for (int s = 0; s < inst.S && rep.has_incumbent; ++s) {
      int ones = 0;
      for (int w = 0; w <= inst.W; ++w) {
        double v = rep.response.ybar(s, w);
        one_hot = one_hot && (v == 0.0 || v == 1.0);
        ones += v == 1.0;
      }
      one_hot = one_hot && ones == 1;
    }
  }
  return {worst <= 1e-6 && one_hot,
          fmt("max relative deviation %.3g, one-hot %.0f", worst, one_hot ? 1.0 : 0.0)};
}

Outcome criterion8() {
  std::mt19937_64 rng(8);
  int points = 0, bad = 0;
  double worst_threshold = 0.0;
  for (int k = 0; k < 10; ++k) {
    Instance inst = oracle::random_instance(80000 + k, {1 + k % 3, 1 + k % 2, 1 + (k / 2) % 2});
    std::vector<int> choice(inst.S, 0);
    for (;;) {
      Pattern p = Pattern::pure(choice, inst.W + 1);
      for (const auto& x : oracle::interior_points(inst, p, kInf, 3, rng)) {
        ++points;
        double threshold = kInf;
        for (double beta = 1.0; beta < 1e12; beta *= 2.0) {
          if (pattern_of(inst, x, beta) != p) {
            threshold = kInf;
            continue;
          }
          if (std::isinf(threshold)) threshold = beta;
        }
        auto d = det_response_set(inst, x);
        bool singleton = true;
        for (int s = 0; s < inst.S; ++s)
          singleton = singleton && d.argmin[s] == std::vector<int>{choice[s]};
        if (std::isinf(threshold) || !singleton) ++bad;
        else worst_threshold = std::max(worst_threshold, threshold);
      }
      int s = 0;
      while (s < inst.S && choice[s] == inst.W) choice[s++] = 0;
      if (s == inst.S) break;
      ++choice[s];
    }
  }
  return {bad == 0 && points > 0,
          fmt("%.0f points, %.0f failures, largest threshold %.3g", points, bad, worst_threshold)};
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  auto set = oracle::tiny_set();
  std::vector<double> opt;
  for (const auto& inst : set) opt.push_back(oracle::best_over_patterns(inst, 1.0).value);
  int hits = 0, monotone = 0;
  for (int k = 0; k < 100; ++k) {
    const auto& inst = set[k % 20];
    QspcOptions o;
    o.rng_seed = static_cast<std::uint64_t>(k);
    SolveReport rep = qspc(inst, 1.0, {}, o);
    const double ref = opt[k % 20];
    hits += rep.objective >= ref - 0.01 * std::abs(ref);
    bool mono = true;
    for (std::size_t i = 1; i < rep.log.size(); ++i) mono = mono && rep.log[i].value >= rep.log[i - 1].value;
    monotone += mono;
  }
  const double t = seconds_since(t0);
  return {hits >= 95 && monotone == 100 && t < 600.0,
          fmt("%.0f/100 within 1%%, %.0f/100 monotone, %.1f s", hits, monotone, t)};
}

Outcome criterion10() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-5.0, 5.0), lb(-2.0, 2.0);
  std::uniform_int_distribution<int> nw(1, 8);
  long violations = 0;
  for (int k = 0; k < 10000; ++k) {
    VectorXd V(nw(rng) + 1);
    V(0) = 0.0;
    for (int i = 1; i < V.size(); ++i) V(i) = u(rng);
    violations += check_metric_estimates(V, std::pow(10.0, lb(rng))).violations;
  }
  double worst_gamma = 0.0;
  for (int w = 1; w <= 10000; ++w) worst_gamma = std::max(worst_gamma, gamma_bound(w));
  return {violations == 0 && worst_gamma <= 1.0 / 9.0,
          fmt("%.0f violations in 10^4 draws, max gamma %.6f", static_cast<double>(violations),
              worst_gamma)};
}

Outcome criterion11() {
  // One contract, five customers with reservation bills 1..5, zero cost.
  Instance inst;
  inst.S = 5;
  inst.W = inst.H = 1;
  inst.R.resize(5, 1);
  inst.C = Eigen::MatrixXd::Zero(5, 1);
  inst.rho = VectorXd::Ones(5);
  for (int s = 0; s < 5; ++s) {
    inst.E.push_back(PriceMatrix::Ones(1, 1));
    inst.R(s, 0) = s + 1.0;
  }
  inst.X.lower = PriceMatrix::Zero(1, 1);
  inst.X.upper = PriceMatrix::Constant(1, 1, 6.0);

  const int n = 6001;
  const double beta = 1.0;
  SweepAxis axis{0, 0, 0.0, 6.0};
  auto rows = profit_sweep(inst, PriceVector(1, 1), axis, n, {beta},
                           {ProfitModel::det, ProfitModel::quad});
  const double step = (axis.hi - axis.lo) / (n - 1);
  const double L = quad_lipschitz_bound(inst, PriceVector(1, 1), axis, beta);
  double peak = 0.0, jump = 0.0, worst_ratio = 0.0;
  for (int i = 0; i < n; ++i) peak = std::max(peak, rows[2 * i].value);
  for (int i = 1; i < n; ++i) {
    jump = std::max(jump, rows[2 * (i - 1)].value - rows[2 * i].value);
    worst_ratio = std::max(worst_ratio,
                           std::abs(rows[2 * i + 1].value - rows[2 * i - 1].value) / (L * step));
  }
  return {jump >= 0.1 * peak && worst_ratio <= 1.0,
          fmt("det jump %.3g of peak %.3g, quad increment / bound %.3g", jump, peak, worst_ratio)};
}

Outcome criterion12() {
  double worst_gap = -kInf;
  for (int k = 0; k < 5; ++k) {
    GeneratorConfig cfg;
    cfg.S = 3;
    cfg.n_company_contracts = 2;
    cfg.seed = 1200 + k;
    Instance inst = generate(cfg);
    SolveReport det = solve_det(inst);
    if (!det.has_incumbent) return {false, "solve_det found no incumbent"};
    BetaSweepOptions o;
    o.qspc.rng_seed = k;
    for (const auto& p : beta_sweep(inst, {0.01, 0.05, 0.2, 1.0}, det.x, o))
      worst_gap = std::max(worst_gap, (p.quad_at_det - p.optimum) / scaled(p.optimum));
  }
  Instance toy;
  toy.S = toy.W = toy.H = 1;
  toy.E.push_back(PriceMatrix::Ones(1, 1));
  toy.R = Eigen::MatrixXd::Constant(1, 1, 5.0);
  toy.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  toy.rho = VectorXd::Ones(1);
  toy.X.lower = PriceMatrix::Zero(1, 1);
  toy.X.upper = PriceMatrix::Constant(1, 1, 10.0);
  SolveReport det = solve_det(toy);
  const double tail = std::abs(beta_sweep(toy, {1e6}, det.x)[0].optimum - det.objective);
  return {worst_gap <= 1e-9 && tail <= 1e-3,
          fmt("max (fixed - optimum) %.3g, tail deviation %.3g", worst_gap, tail)};
}

Outcome criterion13() {
  GeneratorConfig cfg;
  cfg.S = 4;
  cfg.n_company_contracts = 2;
  cfg.seed = 13;
  Instance inst = generate(cfg);
  int mismatches = 0;
  std::string first;
  for (int threads : {1, 4, 1, 4}) {
    QspcOptions o;
    o.rng_seed = 13;
    o.threads = threads;
    std::string s = report_string(inst, qspc(inst, 0.1, {}, o),
                                  {ResponseModel::quad, "qspc", 0.1, 13});
    s += report_string(inst, solve_quad(inst, 0.1, {1e-4}), {ResponseModel::quad, "bnb", 0.1, 13});
    s += report_string(inst, solve_det(inst), {ResponseModel::det, "bnb", 0.0, 13});
    if (first.empty()) first = s;
    else mismatches += s != first;
  }
  return {mismatches == 0, fmt("%.0f mismatching reruns out of 3", mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"projection oracle", criterion1},
      {"KKT certification", criterion2},
      {"soft threshold", criterion3},
      {"complementarity identity", criterion4},
      {"per-cell concavity", criterion5},
      {"global optimum oracle", criterion6},
      {"deterministic oracle", criterion7},
      {"convergence to pure patterns", criterion8},
      {"local search quality", criterion9},
      {"logit bounds", criterion10},
      {"discontinuity contrast", criterion11},
      {"beta sweep sandwich", criterion12},
      {"determinism", criterion13},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
