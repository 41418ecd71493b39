#include "tariff/qspc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tariff/subqp.hpp"

namespace tariff {
namespace {

using Eigen::VectorXd;

constexpr double kAcceptTol = 1e-9;
constexpr double kResetTol = 1e-6;

struct Evaluated {
  std::optional<QspcPoint> point;
};

Evaluated evaluate(const Instance& inst, const Beta& beta, const Pattern& p,
                   const PriceVector& warm) {
  auto opt = solve_cell(inst, p, beta, warm);
  if (!opt) return {};
  return {QspcPoint{p, opt->x, quad_profit(inst, opt->x, beta)}};
}

/// Runs f(i) for i in [0, n) on up to `threads` workers; results are written
/// by index so the outcome does not depend on scheduling.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) f(i);
    });
  for (auto& th : pool) th.join();
}

ZFixing fixing_of(const Pattern& p) {
  auto rows = p.rows();
  return ZFixing(rows.begin(), rows.end());
}

int trace_level_from_env() {
  const char* v = std::getenv("TARIFF_COMPLEX_LOG");
  return v ? std::atoi(v) : 0;
}

}  // namespace

void QspcOptions::check(const Instance& inst) const {
  if (r_max < 0) throw std::invalid_argument("qspc: r_max must be >= 0");
  if (gamma_S < 0 || gamma_S > inst.S) throw std::invalid_argument("qspc: gamma_S must lie in [0, S]");
  if (gamma_W < 0 || gamma_W > inst.W) throw std::invalid_argument("qspc: gamma_W must lie in [0, W]");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("qspc: sigma must lie in [0, 1]");
  if (threads < 1) throw std::invalid_argument("qspc: threads must be >= 1");
}

ExploreResult explore_good_neighbors(const Instance& inst, const Beta& beta,
                                     const QspcPoint& current, NeighborMode mode,
                                     int threads, const SolveOptions& miqp) {
  ExploreResult out{current, false, 0, 0};
  const auto moves = neighbors(inst, current.pattern, beta, current.x);

  if (mode == NeighborMode::restricted_miqp) {
    ZFixing fix = fixing_of(current.pattern);
    for (const auto& mv : moves) {
      if (mv.minus) fix[mv.segment][mv.worst_active] = -1;
      if (mv.plus) fix[mv.segment][mv.best_inactive] = -1;
      out.candidates += (mv.minus ? 1 : 0) + (mv.plus ? 1 : 0);
    }
    SolveReport rep = solve_quad(inst, beta, miqp, fix);
    if (rep.has_incumbent && rep.objective > current.value + kAcceptTol) {
      out.best = {rep.pattern, rep.x, rep.objective};
      out.improved = true;
    }
    return out;
  }

  std::vector<Pattern> cands;
  for (const auto& mv : moves) {
    if (mv.minus) cands.push_back(*mv.minus);
    if (mv.plus) cands.push_back(*mv.plus);
  }
  out.candidates = static_cast<int>(cands.size());
  std::vector<Evaluated> results(cands.size());
  parallel_for(static_cast<int>(cands.size()), threads, [&](int i) {
    results[i] = evaluate(inst, beta, cands[i], current.x);
  });

  const QspcPoint* best = nullptr;
  for (const auto& r : results) {
    if (!r.point) {
      ++out.infeasible;
      continue;
    }
    if (!best || r.point->value > best->value ||
        (r.point->value == best->value && r.point->pattern < best->pattern))
      best = &*r.point;
  }
  if (best && best->value > current.value + kAcceptTol) {
    out.best = *best;
    out.improved = true;
  }
  return out;
}

RestartResult miqp_restart(const Instance& inst, const Beta& beta, const QspcPoint& current,
                           const QspcOptions& opts, std::mt19937_64& rng) {
  opts.check(inst);
  const int O = inst.W + 1;
  RestartResult out{current, false, false, fixing_of(current.pattern)};

  std::vector<int> segs(inst.S), cols(inst.W);
  std::iota(segs.begin(), segs.end(), 0);
  std::iota(cols.begin(), cols.end(), 1);
  std::shuffle(segs.begin(), segs.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  std::vector<std::vector<bool>> freed(inst.S, std::vector<bool>(O, false));
  for (int k = 0; k < opts.gamma_S; ++k)
    for (int w = 0; w < O; ++w) freed[segs[k]][w] = true;
  for (int k = 0; k < opts.gamma_W; ++k)
    for (int s = 0; s < inst.S; ++s) freed[s][cols[k]] = true;
  std::bernoulli_distribution coin(opts.sigma);
  for (int s = 0; s < inst.S; ++s)
    for (int w = 0; w < O; ++w) {
      bool flip = coin(rng);
      if (flip) freed[s][w] = true;
    }
  bool any = false;
  for (int s = 0; s < inst.S; ++s)
    for (int w = 0; w < O; ++w)
      if (freed[s][w]) {
        out.fixing[s][w] = -1;
        any = true;
      }
  if (!any) return out;

  SolveReport rep = solve_quad(inst, beta, opts.miqp, out.fixing);
  out.hit_limit = rep.status == SolveStatus::time_limit || rep.status == SolveStatus::node_limit;
  if (rep.has_incumbent && rep.objective > current.value + kAcceptTol) {
    out.best = {rep.pattern, rep.x, rep.objective};
    out.improved = true;
  }
  return out;
}

QspcPoint qspc_start(const Instance& inst, const Beta& beta,
                     const std::optional<PriceVector>& start) {
  PriceVector x0 = start ? *start : inst.X.midpoint();
  if (!inst.X.contains(x0)) {
    // Euclidean projection onto X.
    const int n = inst.price_dim();
    QpProblem qp = QpProblem::with_dim(n);
    qp.Q = Eigen::MatrixXd::Identity(n, n);
    qp.c = -VectorXd(x0.flat());
    for (const auto& r : polytope_rows(inst)) qp.add_inequality(r.lhs.grad, -r.lhs.constant);
    QpSolution sol = solve_qp(qp);
    if (sol.status == QpStatus::infeasible)
      throw std::invalid_argument("qspc: price polytope is empty");
    x0 = PriceVector::from_flat(sol.z, inst.W, inst.H);
  }
  Pattern p = pattern_of(inst, x0, beta);
  auto opt = solve_cell(inst, p, beta, x0);
  if (!opt) return {p, x0, quad_profit(inst, x0, beta)};
  return {p, opt->x, quad_profit(inst, opt->x, beta)};
}

SolveReport qspc(const Instance& inst, const Beta& beta,
                 const std::optional<PriceVector>& start, const QspcOptions& opts) {
  opts.check(inst);
  beta.check();
  const auto t0 = std::chrono::steady_clock::now();
  const int trace = std::max(opts.miqp.trace_level, trace_level_from_env());
  std::mt19937_64 rng(opts.rng_seed);

  SolveReport rep;
  long step = 0;
  QspcPoint best = qspc_start(inst, beta, start);
  auto record = [&](const char* phase) {
    rep.log.push_back({phase, best.pattern.hash(), best.value, step});
    if (trace > 0)
      std::fprintf(stderr, "qspc step=%ld phase=%s phi=%.12g pattern=%s time=%.3f\n", step,
                   phase, best.value, best.pattern.to_string().c_str(),
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  record("start");

  int r = 0;
  while (r < opts.r_max && step < opts.max_steps) {
    if (r == 0) {
      while (step < opts.max_steps) {
        ExploreResult ex = explore_good_neighbors(inst, beta, best, opts.neighbor_mode,
                                                  opts.threads, opts.miqp);
        ++step;
        if (!ex.improved) break;
        best = ex.best;
        record("descent");
      }
    }
    RestartResult rs = miqp_restart(inst, beta, best, opts, rng);
    ++step;
    if (rs.improved) {
      const double gain = rs.best.value - best.value;
      r = gain > kResetTol * std::max(1.0, std::abs(best.value)) ? 0 : r + 1;
      best = rs.best;
    } else {
      ++r;
    }
    record("restart");
  }

  rep.has_incumbent = true;
  rep.x = best.x;
  rep.pattern = best.pattern;
  rep.objective = best.value;
  rep.response = quad_response(inst, best.x, beta).response;
  rep.bound = std::numeric_limits<double>::infinity();
  rep.gap = std::numeric_limits<double>::infinity();
  rep.nodes = step;
  rep.status = SolveStatus::heuristic;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace tariff
