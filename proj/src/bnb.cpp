#include "tariff/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "tariff/subqp.hpp"

namespace tariff {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-6;

PriceVector corner(const Instance& inst, bool upper) {
  return PriceVector(upper ? inst.X.upper : inst.X.lower);
}

struct Candidate {
  PriceVector x;
  double value = 0.0;
  Pattern pattern;
  ResponseMatrix response;
};

/// A mixed-binary convex QP plus the hooks that turn relaxation points into
/// feasible leader solutions.
struct MipModel {
  QpProblem base;
  std::vector<int> binary;  // variable index of each binary
  int segments = 0;
  int options = 0;
  std::vector<int> root_fix;  // per binary: -1, 0, 1
  std::function<std::optional<Pattern>(const VectorXd&)> heuristic;
  std::function<std::optional<Candidate>(const Pattern&, const VectorXd&)> from_pattern;
};

struct Node {
  std::vector<int> fix;
  double bound = kInf;
  long id = 0;
  VectorXd warm;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

QpProblem with_fixings(const MipModel& m, const std::vector<int>& fix) {
  QpProblem qp = m.base;
  const int n = qp.dim();
  for (std::size_t k = 0; k < fix.size(); ++k) {
    if (fix[k] < 0) continue;
    qp.add_equality(VectorXd::Unit(n, m.binary[k]), static_cast<double>(fix[k]));
  }
  return qp;
}

Pattern pattern_from_binaries(const MipModel& m, const VectorXd& z) {
  std::vector<std::vector<int>> rows(m.segments, std::vector<int>(m.options, 0));
  for (int s = 0; s < m.segments; ++s)
    for (int w = 0; w < m.options; ++w)
      rows[s][w] = z(m.binary[s * m.options + w]) > 0.5 ? 1 : 0;
  return Pattern(rows);
}

bool compatible(const MipModel& m, const Pattern& p) {
  for (int s = 0; s < m.segments; ++s)
    for (int w = 0; w < m.options; ++w) {
      int f = m.root_fix[s * m.options + w];
      if (f >= 0 && f != (p.active(s, w) ? 1 : 0)) return false;
    }
  return true;
}

/// Overwrites fixed entries; nullopt if a row would become empty.
std::optional<Pattern> repaired(const MipModel& m, const Pattern& p) {
  auto rows = p.rows();
  for (int s = 0; s < m.segments; ++s) {
    bool any = false;
    for (int w = 0; w < m.options; ++w) {
      int f = m.root_fix[s * m.options + w];
      if (f >= 0) rows[s][w] = f;
      any = any || rows[s][w] != 0;
    }
    if (!any) return std::nullopt;
  }
  return Pattern(rows);
}

SolveReport branch_and_bound(const MipModel& m, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  SolveReport rep;
  rep.status = SolveStatus::optimal;
  double inc = -kInf;
  double pruned_bound = -kInf;
  std::set<Pattern> tried;

  auto offer = [&](const std::optional<Candidate>& cand, long node) {
    if (!cand || !(cand->value > inc + 1e-12)) return;
    inc = cand->value;
    rep.has_incumbent = true;
    rep.x = cand->x;
    rep.objective = cand->value;
    rep.pattern = cand->pattern;
    rep.response = cand->response;
    rep.log.push_back({"incumbent", cand->pattern.hash(), cand->value, node});
    if (opts.trace_level > 0)
      std::fprintf(stderr, "bnb node=%ld incumbent=%.10g pattern=%s time=%.3f\n", node, inc,
                   cand->pattern.to_string().c_str(), elapsed());
  };
  auto try_pattern = [&](const Pattern& p, const VectorXd& z, long node) {
    if (!tried.insert(p).second) return;
    offer(m.from_pattern(p, z), node);
  };
  auto close_enough = [&](double bound) {
    return rep.has_incumbent && relative_gap(bound, inc) <= opts.gap;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{m.root_fix, kInf, next_id++, {}});

  while (!open.empty()) {
    if (close_enough(open.top().bound)) {
      rep.status = SolveStatus::gap_reached;
      break;
    }
    if (elapsed() > opts.time_limit_s) {
      rep.status = SolveStatus::time_limit;
      break;
    }
    if (opts.node_limit >= 0 && rep.nodes >= opts.node_limit) {
      rep.status = SolveStatus::node_limit;
      break;
    }
    Node node = open.top();
    open.pop();
    const long nid = rep.nodes++;

    QpProblem qp = with_fixings(m, node.fix);
    std::optional<VectorXd> warm;
    if (node.warm.size() > 0) warm = node.warm;
    QpSolution sol = solve_qp(qp, warm);
    if (sol.status == QpStatus::infeasible) continue;
    const bool exact = sol.optimal();
    double bound = exact ? std::min(node.bound, -sol.value) : node.bound;
    if (opts.trace_level > 1)
      std::fprintf(stderr, "bnb node=%ld bound=%.10g incumbent=%.10g status=%s time=%.3f\n",
                   nid, bound, inc, std::string(to_string(sol.status)).c_str(), elapsed());

    if (auto p = m.heuristic(sol.z)) {
      if (compatible(m, *p)) try_pattern(*p, sol.z, nid);
      else if (auto q = repaired(m, *p)) try_pattern(*q, sol.z, nid);
    }

    int branch = -1;
    double best_frac = -1.0;
    for (std::size_t k = 0; k < m.binary.size(); ++k) {
      if (node.fix[k] >= 0) continue;
      double v = sol.z(m.binary[k]);
      double frac = std::min(v, 1.0 - v);
      if (frac > kIntTol && frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = static_cast<int>(k);
      }
    }
    if (branch < 0) {
      if (exact) {
        try_pattern(pattern_from_binaries(m, sol.z), sol.z, nid);
        pruned_bound = std::max(pruned_bound, std::min(bound, -sol.value));
      } else {
        pruned_bound = std::max(pruned_bound, bound);
      }
      continue;
    }
    if (close_enough(bound)) {
      pruned_bound = std::max(pruned_bound, bound);
      continue;
    }
    for (int val : {1, 0}) {
      Node child{node.fix, bound, next_id++, sol.z};
      child.fix[branch] = val;
      open.push(std::move(child));
    }
  }

  double bound = std::max(inc, pruned_bound);
  if (!open.empty()) bound = std::max(bound, open.top().bound);
  rep.bound = bound;
  rep.gap = rep.has_incumbent ? relative_gap(bound, inc) : kInf;
  rep.wall_time = elapsed();
  return rep;
}

Candidate quad_candidate(const Instance& inst, const Beta& beta, const Pattern& p,
                         const CellOptimum& opt) {
  Candidate c;
  c.x = opt.x;
  c.value = quad_profit(inst, opt.x, beta);
  c.pattern = p;
  c.response = quad_response(inst, opt.x, beta).response;
  return c;
}

Candidate det_candidate(const Instance& inst, const Pattern& p, const CellOptimum& opt) {
  Candidate c;
  c.x = opt.x;
  c.value = opt.value;
  c.pattern = p;
  c.response.ybar = MatrixXd::Zero(inst.S, inst.W + 1);
  for (int s = 0; s < inst.S; ++s)
    for (int w = 0; w <= inst.W; ++w)
      if (p.active(s, w)) c.response.ybar(s, w) = 1.0;
  return c;
}

void add_price_rows(const Instance& inst, QpProblem& qp) {
  const int n = inst.price_dim();
  const int N = qp.dim();
  for (int w = 0; w < inst.W; ++w)
    for (int h = 0; h < inst.H; ++h) {
      int i = w * inst.H + h;
      qp.add_inequality(VectorXd::Unit(N, i), inst.X.upper(w, h));
      qp.add_inequality(-VectorXd::Unit(N, i), -inst.X.lower(w, h));
    }
  for (const auto& e : inst.X.extra) {
    VectorXd a = VectorXd::Zero(N);
    a.head(n) = Eigen::Map<const VectorXd>(e.g.data(), n);
    qp.add_inequality(a, e.h);
  }
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::gap_reached: return "gap_reached";
    case SolveStatus::time_limit: return "time_limit";
    case SolveStatus::node_limit: return "node_limit";
    case SolveStatus::heuristic: return "heuristic";
  }
  return "unknown";
}

double relative_gap(double bound, double objective) {
  return std::max(0.0, (bound - objective) / std::max(1.0, std::abs(objective)));
}

BigM bigm_det(const Instance& inst) {
  BigM m{VectorXd::Zero(inst.S), MatrixXd::Zero(inst.S, inst.W)};
  const PriceVector lo = corner(inst, false), hi = corner(inst, true);
  for (int s = 0; s < inst.S; ++s) {
    double m0 = 0.0;
    for (int w = 0; w < inst.W; ++w) m0 = std::max(m0, inst.R(s, w) - bill(inst, s, w, lo));
    m.M0(s) = m0;
    for (int w = 0; w < inst.W; ++w) m.M(s, w) = bill(inst, s, w, hi) - inst.R(s, w) + m0;
  }
  return m;
}

BigM bigm_quad(const Instance& inst, const Beta& beta) {
  beta.check();
  BigM m = bigm_det(inst);
  for (int s = 0; s < inst.S; ++s) {
    const double t = 2.0 * beta.inverse(s);
    m.M0(s) += t;
    m.M.row(s).array() += t;
  }
  return m;
}

SolveReport solve_det(const Instance& inst, const SolveOptions& opts) {
  const int n = inst.price_dim(), S = inst.S, O = inst.W + 1;
  const int ny = S * O, N = n + ny + S;
  auto yi = [&](int s, int w) { return n + s * O + w; };
  auto mi = [&](int s) { return n + ny + s; };
  const BigM M = bigm_det(inst);

  MipModel m;
  m.segments = S;
  m.options = O;
  m.base = QpProblem::with_dim(N);
  QpProblem& qp = m.base;
  for (int s = 0; s < S; ++s) {
    const double rho = inst.rho(s);
    qp.c(mi(s)) = -rho;
    for (int w = 1; w < O; ++w) qp.c(yi(s, w)) = -rho * (inst.R(s, w - 1) - inst.C(s, w - 1));
  }
  add_price_rows(inst, qp);
  for (int s = 0; s < S; ++s) {
    VectorXd sum = VectorXd::Zero(N);
    for (int w = 0; w < O; ++w) {
      sum(yi(s, w)) = 1.0;
      qp.add_inequality(-VectorXd::Unit(N, yi(s, w)), 0.0);
      qp.add_inequality(VectorXd::Unit(N, yi(s, w)), 1.0);
      // mu <= V_sw  and  V_sw - mu <= M (1 - y_sw)
      VectorXd a = VectorXd::Zero(N);
      double rhs = 0.0;
      if (w > 0) {
        for (int h = 0; h < inst.H; ++h) a((w - 1) * inst.H + h) = inst.E[s](w - 1, h);
        rhs = inst.R(s, w - 1);
      }
      const double big = w == 0 ? M.M0(s) : M.M(s, w - 1);
      VectorXd lower = -a;
      lower(mi(s)) = 1.0;
      qp.add_inequality(lower, -rhs);
      VectorXd upper = a;
      upper(mi(s)) = -1.0;
      upper(yi(s, w)) = big;
      qp.add_inequality(upper, rhs + big);
      m.binary.push_back(yi(s, w));
    }
    qp.add_equality(sum, 1.0);
  }
  m.root_fix.assign(m.binary.size(), -1);

  m.heuristic = [&](const VectorXd& z) -> std::optional<Pattern> {
    PriceVector x = PriceVector::from_flat(z.head(n), inst.W, inst.H);
    return Pattern::pure(det_response_set(inst, x).choice, O);
  };
  m.from_pattern = [&](const Pattern& p, const VectorXd&) -> std::optional<Candidate> {
    if (!p.is_pure()) return std::nullopt;
    auto opt = solve_asymptotic_cell(inst, p);
    if (!opt) return std::nullopt;
    return det_candidate(inst, p, *opt);
  };
  return branch_and_bound(m, opts);
}

SolveReport solve_quad(const Instance& inst, const Beta& beta, const SolveOptions& opts,
                       const std::optional<ZFixing>& fixed_z) {
  beta.check();
  if (beta.is_infinite()) throw std::invalid_argument("solve_quad: beta must be finite");
  const int n = inst.price_dim(), S = inst.S, O = inst.W + 1;
  const int ny = S * O, N = n + 2 * ny + S;
  auto yi = [&](int s, int w) { return n + s * O + w; };
  auto mi = [&](int s) { return n + ny + s; };
  auto zi = [&](int s, int w) { return n + ny + S + s * O + w; };
  const BigM M = bigm_quad(inst, beta);

  MipModel m;
  m.segments = S;
  m.options = O;
  m.base = QpProblem::with_dim(N);
  QpProblem& qp = m.base;
  for (int s = 0; s < S; ++s) {
    const double rho = inst.rho(s);
    const double t = 2.0 * beta.inverse(s);
    qp.c(mi(s)) = -rho;
    for (int w = 0; w < O; ++w) {
      qp.Q(yi(s, w), yi(s, w)) = 2.0 * t * rho;
      if (w > 0) qp.c(yi(s, w)) = -rho * (inst.R(s, w - 1) - inst.C(s, w - 1));
    }
  }
  add_price_rows(inst, qp);
  for (int s = 0; s < S; ++s) {
    const double t = 2.0 * beta.inverse(s);
    VectorXd sum = VectorXd::Zero(N);
    for (int w = 0; w < O; ++w) {
      sum(yi(s, w)) = 1.0;
      qp.add_inequality(-VectorXd::Unit(N, yi(s, w)), 0.0);
      VectorXd yz = VectorXd::Unit(N, yi(s, w));
      yz(zi(s, w)) = -1.0;
      qp.add_inequality(yz, 0.0);
      qp.add_inequality(-VectorXd::Unit(N, zi(s, w)), 0.0);
      qp.add_inequality(VectorXd::Unit(N, zi(s, w)), 1.0);
      // lambda = V + t y - mu >= 0  and  lambda <= M (1 - z)
      VectorXd a = VectorXd::Zero(N);
      double rhs = 0.0;
      if (w > 0) {
        for (int h = 0; h < inst.H; ++h) a((w - 1) * inst.H + h) = inst.E[s](w - 1, h);
        rhs = inst.R(s, w - 1);
      }
      a(yi(s, w)) = t;
      a(mi(s)) = -1.0;
      const double big = w == 0 ? M.M0(s) : M.M(s, w - 1);
      qp.add_inequality(-a, -rhs);
      VectorXd upper = a;
      upper(zi(s, w)) = big;
      qp.add_inequality(upper, rhs + big);
      m.binary.push_back(zi(s, w));
    }
    qp.add_equality(sum, 1.0);
  }
  m.root_fix.assign(m.binary.size(), -1);
  if (fixed_z) {
    if (static_cast<int>(fixed_z->size()) != S)
      throw std::invalid_argument("solve_quad: fixed_z must have S rows");
    for (int s = 0; s < S; ++s) {
      if (static_cast<int>((*fixed_z)[s].size()) != O)
        throw std::invalid_argument("solve_quad: fixed_z rows must have W+1 entries");
      for (int w = 0; w < O; ++w) {
        int f = (*fixed_z)[s][w];
        if (f < -1 || f > 1) throw std::invalid_argument("solve_quad: fixed_z entries are -1, 0 or 1");
        m.root_fix[s * O + w] = f;
      }
    }
  }

  m.heuristic = [&](const VectorXd& z) -> std::optional<Pattern> {
    PriceVector x = PriceVector::from_flat(z.head(n), inst.W, inst.H);
    return pattern_of(inst, x, beta);
  };
  m.from_pattern = [&](const Pattern& p, const VectorXd& z) -> std::optional<Candidate> {
    PriceVector x = PriceVector::from_flat(z.head(n), inst.W, inst.H);
    auto opt = solve_cell(inst, p, beta, x);
    if (!opt) return std::nullopt;
    return quad_candidate(inst, beta, p, *opt);
  };
  return branch_and_bound(m, opts);
}

std::vector<Pattern> enumerate_patterns(const Instance& inst, const Beta& beta,
                                        long max_patterns) {
  const int O = inst.W + 1;
  const long per_row = (1L << O) - 1;
  double total = std::pow(static_cast<double>(per_row), inst.S);
  if (total > static_cast<double>(max_patterns))
    throw std::length_error("enumerate_patterns: " + std::to_string(static_cast<long>(total)) +
                            " candidate patterns exceed the limit");
  std::vector<long> mask(inst.S, 1);
  std::vector<Pattern> out;
  for (;;) {
    std::vector<std::vector<int>> rows(inst.S, std::vector<int>(O));
    for (int s = 0; s < inst.S; ++s)
      for (int w = 0; w < O; ++w) rows[s][w] = static_cast<int>((mask[s] >> (O - 1 - w)) & 1);
    Pattern p(rows);
    if (is_feasible(inst, p, beta).feasible) out.push_back(std::move(p));
    int s = inst.S - 1;
    while (s >= 0 && mask[s] == per_row) mask[s--] = 1;
    if (s < 0) break;
    ++mask[s];
  }
  return out;
}

SolveReport enumerate_quad(const Instance& inst, const Beta& beta, long max_patterns) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  for (const auto& p : enumerate_patterns(inst, beta, max_patterns)) {
    ++rep.nodes;
    auto opt = solve_cell(inst, p, beta);
    if (!opt) continue;
    double v = quad_profit(inst, opt->x, beta);
    if (!rep.has_incumbent || v > rep.objective + 1e-12) {
      rep.has_incumbent = true;
      rep.objective = v;
      rep.x = opt->x;
      rep.pattern = p;
      rep.log.push_back({"enumerate", p.hash(), v, rep.nodes});
    }
  }
  if (rep.has_incumbent) rep.response = quad_response(inst, rep.x, beta).response;
  rep.bound = rep.objective;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SolveReport enumerate_det(const Instance& inst, long max_patterns) {
  const auto t0 = std::chrono::steady_clock::now();
  const int O = inst.W + 1;
  if (std::pow(static_cast<double>(O), inst.S) > static_cast<double>(max_patterns))
    throw std::length_error("enumerate_det: too many pure patterns");
  SolveReport rep;
  std::vector<int> choice(inst.S, 0);
  for (;;) {
    ++rep.nodes;
    Pattern p = Pattern::pure(choice, O);
    if (auto opt = solve_asymptotic_cell(inst, p)) {
      if (!rep.has_incumbent || opt->value > rep.objective + 1e-12) {
        Candidate c = det_candidate(inst, p, *opt);
        rep.has_incumbent = true;
        rep.objective = c.value;
        rep.x = c.x;
        rep.pattern = p;
        rep.response = c.response;
        rep.log.push_back({"enumerate", p.hash(), c.value, rep.nodes});
      }
    }
    int s = inst.S - 1;
    while (s >= 0 && choice[s] == O - 1) choice[s--] = 0;
    if (s < 0) break;
    ++choice[s];
  }
  rep.bound = rep.objective;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace tariff
