#include "tariff/subqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tariff {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kRowZero = 1e-14;
constexpr double kActiveTol = 1e-9;
constexpr double kPhaseOneTol = 1e-9;
constexpr double kDependentTol = 1e-9;
constexpr int kBlandAfter = 8;  // consecutive degenerate steps

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Normalised working copy of the problem: every inequality row has unit norm,
// equalities are reduced to a linearly independent subset.
struct Normalized {
  MatrixXd Q;
  VectorXd c;
  MatrixXd A;  // inequalities
  VectorXd b;
  VectorXd scale;               // original row norms (0 = dropped row)
  std::vector<int> in_rows;     // original index of each kept inequality
  MatrixXd Aeq;                 // independent equalities, unit norm
  VectorXd beq;
  VectorXd eq_scale;
  std::vector<int> eq_rows;     // original index of each kept equality
  std::vector<int> dependent_eq;
  bool trivially_infeasible = false;
};

// Independence test of a against the row space of M (rows), via least squares.
bool independent_of(const MatrixXd& M, const VectorXd& a) {
  if (M.rows() == 0) return a.norm() > kDependentTol;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(M.transpose());
  VectorXd coef = qr.solve(a);
  return (M.transpose() * coef - a).norm() > kDependentTol * std::max(1.0, a.norm());
}

Normalized normalize(const QpProblem& prob) {
  const int n = prob.dim();
  Normalized out;
  out.Q = 0.5 * (prob.Q + prob.Q.transpose());
  out.c = prob.c;

  std::vector<int> keep;
  out.scale = VectorXd::Zero(prob.A_in.rows());
  for (int i = 0; i < prob.A_in.rows(); ++i) {
    double nrm = prob.A_in.row(i).norm();
    if (nrm < kRowZero) {
      if (prob.b_in(i) < -kActiveTol) out.trivially_infeasible = true;
      continue;
    }
    out.scale(i) = nrm;
    keep.push_back(i);
  }
  out.A.resize(static_cast<int>(keep.size()), n);
  out.b.resize(static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    int i = keep[k];
    out.A.row(static_cast<int>(k)) = prob.A_in.row(i) / out.scale(i);
    out.b(static_cast<int>(k)) = prob.b_in(i) / out.scale(i);
  }
  out.in_rows = std::move(keep);

  out.eq_scale = VectorXd::Zero(prob.A_eq.rows());
  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  MatrixXd acc(0, n);
  for (int i = 0; i < prob.A_eq.rows(); ++i) {
    double nrm = prob.A_eq.row(i).norm();
    if (nrm < kRowZero) {
      if (std::abs(prob.b_eq(i)) > kActiveTol) out.trivially_infeasible = true;
      continue;
    }
    VectorXd a = prob.A_eq.row(i).transpose() / nrm;
    if (!independent_of(acc, a)) {
      out.dependent_eq.push_back(i);
      continue;
    }
    out.eq_scale(i) = nrm;
    out.eq_rows.push_back(i);
    rows.push_back(a);
    rhs.push_back(prob.b_eq(i) / nrm);
    acc.conservativeResize(acc.rows() + 1, n);
    acc.row(acc.rows() - 1) = a.transpose();
  }
  out.Aeq = acc;
  out.beq = Eigen::Map<VectorXd>(rhs.data(), static_cast<int>(rhs.size()));
  return out;
}

enum class CoreStatus { optimal, unbounded, max_iterations };

struct CoreResult {
  CoreStatus status = CoreStatus::optimal;
  VectorXd z;
  VectorXd lambda;  // per normalised inequality
  VectorXd nu;      // per kept equality
  int iterations = 0;
};

// Primal active-set iterations from a feasible z. Equalities are always in
// the working set; inequality indices are kept sorted for determinism.
CoreResult active_set(const MatrixXd& Q, const VectorXd& c, const MatrixXd& A,
                      const VectorXd& b, const MatrixXd& Aeq, VectorXd z,
                      int max_iter) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(A.rows());
  const int me = static_cast<int>(Aeq.rows());
  const bool has_curvature = Q.size() > 0 && Q.cwiseAbs().maxCoeff() > 0.0;

  std::vector<char> in_work(m, 0);
  std::vector<int> work;
  {
    MatrixXd acc = Aeq;
    for (int i = 0; i < m; ++i) {
      if (acc.rows() >= n) break;
      if (A.row(i).dot(z) - b(i) < -kActiveTol) continue;
      VectorXd a = A.row(i).transpose();
      if (!independent_of(acc, a)) continue;
      acc.conservativeResize(acc.rows() + 1, n);
      acc.row(acc.rows() - 1) = a.transpose();
      work.push_back(i);
      in_work[i] = 1;
    }
  }

  CoreResult res;
  int degenerate_run = 0;
  bool at_subspace_min = false;

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    const int mw = me + static_cast<int>(work.size());
    MatrixXd Aw(mw, n);
    if (me > 0) Aw.topRows(me) = Aeq;
    for (std::size_t k = 0; k < work.size(); ++k)
      Aw.row(me + static_cast<int>(k)) = A.row(work[k]);

    VectorXd g = has_curvature ? VectorXd(Q * z + c) : c;
    const double gscale = std::max(1.0, inf_norm(g));

    MatrixXd Y, Z, Rw;
    if (mw > 0) {
      Eigen::HouseholderQR<MatrixXd> qr(Aw.transpose());
      MatrixXd Qfull = qr.householderQ() * MatrixXd::Identity(n, n);
      Y = Qfull.leftCols(mw);
      Z = Qfull.rightCols(n - mw);
      Rw = qr.matrixQR().topRows(mw).triangularView<Eigen::Upper>();
    } else {
      Z = MatrixXd::Identity(n, n);
    }

    VectorXd p = VectorXd::Zero(n);
    bool unbounded_ray = false;
    if (n - mw > 0 && !at_subspace_min) {
      VectorXd gr = Z.transpose() * g;
      if (has_curvature) {
        MatrixXd Hr = Z.transpose() * Q * Z;
        Hr = 0.5 * (Hr + Hr.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hr);
        const VectorXd& ev = es.eigenvalues();
        const MatrixXd& U = es.eigenvectors();
        const double escale = std::max(1.0, inf_norm(ev));
        VectorXd coef = U.transpose() * gr;
        VectorXd null_part = VectorXd::Zero(coef.size());
        VectorXd newton = VectorXd::Zero(coef.size());
        for (int k = 0; k < coef.size(); ++k) {
          if (ev(k) <= 1e-10 * escale)
            null_part(k) = coef(k);
          else
            newton(k) = coef(k) / ev(k);
        }
        if (null_part.norm() > 1e-10 * gscale) {
          p = -Z * (U * null_part);
          unbounded_ray = true;
        } else {
          p = -Z * (U * newton);
        }
      } else if (gr.norm() > 1e-10 * gscale) {
        p = -Z * gr;
        unbounded_ray = true;
      }
    }
    at_subspace_min = false;

    const double pnorm = inf_norm(p);
    if (pnorm <= 1e-13 * std::max(1.0, inf_norm(z))) {
      // Stationary on the working set: inspect multipliers.
      VectorXd nu = VectorXd::Zero(mw);
      if (mw > 0) {
        VectorXd rhs = -(Y.transpose() * g);
        nu = Rw.triangularView<Eigen::Upper>().solve(rhs);
      }
      int leave = -1;
      double worst = -1e-10 * gscale;
      const bool bland = degenerate_run >= kBlandAfter;
      for (std::size_t k = 0; k < work.size(); ++k) {
        double v = nu(me + static_cast<int>(k));
        if (bland) {
          if (v < -1e-10 * gscale &&
              (leave < 0 || work[k] < work[static_cast<std::size_t>(leave)]))
            leave = static_cast<int>(k);
        } else if (v < worst) {
          worst = v;
          leave = static_cast<int>(k);
        }
      }
      if (leave < 0) {
        res.status = CoreStatus::optimal;
        res.z = z;
        res.lambda = VectorXd::Zero(m);
        for (std::size_t k = 0; k < work.size(); ++k)
          res.lambda(work[k]) = std::max(0.0, nu(me + static_cast<int>(k)));
        res.nu = nu.head(me);
        return res;
      }
      in_work[work[static_cast<std::size_t>(leave)]] = 0;
      work.erase(work.begin() + leave);
      continue;
    }

    // Ratio test; ties go to the lowest constraint index.
    double alpha = unbounded_ray ? std::numeric_limits<double>::infinity() : 1.0;
    int block = -1;
    const double pn = p.norm();
    for (int i = 0; i < m; ++i) {
      if (in_work[i]) continue;
      double ap = A.row(i).dot(p);
      if (ap <= 1e-12 * pn) continue;
      double slack = std::max(0.0, b(i) - A.row(i).dot(z));
      double ratio = slack / ap;
      if (ratio < alpha) {
        alpha = ratio;
        block = i;
      }
    }
    if (block < 0 && unbounded_ray) {
      res.status = CoreStatus::unbounded;
      res.z = z;
      res.lambda = VectorXd::Zero(m);
      res.nu = VectorXd::Zero(me);
      return res;
    }
    z += alpha * p;
    if (block >= 0) {
      degenerate_run = alpha * pn <= 1e-14 ? degenerate_run + 1 : 0;
      auto pos = std::lower_bound(work.begin(), work.end(), block);
      work.insert(pos, block);
      in_work[block] = 1;
    } else {
      degenerate_run = 0;
      at_subspace_min = true;
    }
  }
  res.status = CoreStatus::max_iterations;
  res.z = z;
  res.lambda = VectorXd::Zero(m);
  res.nu = VectorXd::Zero(me);
  return res;
}

// Projects z onto {Aeq z = beq} (Aeq has independent rows).
VectorXd onto_equalities(const MatrixXd& Aeq, const VectorXd& beq, VectorXd z) {
  if (Aeq.rows() == 0) return z;
  VectorXd r = Aeq * z - beq;
  Eigen::LDLT<MatrixXd> ldlt(Aeq * Aeq.transpose());
  z -= Aeq.transpose() * ldlt.solve(r);
  return z;
}

double max_violation(const MatrixXd& A, const VectorXd& b, const VectorXd& z) {
  if (A.rows() == 0) return 0.0;
  return std::max(0.0, (A * z - b).maxCoeff());
}

struct Phase1 {
  bool feasible = false;
  VectorXd z;
  int iterations = 0;
};

Phase1 phase_one(const Normalized& np, const VectorXd& start, int max_iter,
                 const QpProblem& prob) {
  const int n = static_cast<int>(np.c.size());
  Phase1 out;
  VectorXd z = onto_equalities(np.Aeq, np.beq, start);
  for (int i : np.dependent_eq) {
    double r = prob.A_eq.row(i).dot(z) - prob.b_eq(i);
    if (std::abs(r) > kPhaseOneTol * std::max(1.0, prob.A_eq.row(i).norm()))
      return out;
  }
  double viol = max_violation(np.A, np.b, z);
  if (viol <= kActiveTol) {
    out.feasible = true;
    out.z = z;
    return out;
  }
  const int m = static_cast<int>(np.A.rows());
  MatrixXd A(m + 1, n + 1);
  A.setZero();
  A.topLeftCorner(m, n) = np.A;
  A.block(0, n, m, 1).setConstant(-1.0);
  A(m, n) = -1.0;
  VectorXd b(m + 1);
  b.head(m) = np.b;
  b(m) = 0.0;
  MatrixXd Aeq = MatrixXd::Zero(np.Aeq.rows(), n + 1);
  if (np.Aeq.rows() > 0) Aeq.leftCols(n) = np.Aeq;
  // Rescale the stacked rows to unit norm.
  for (int i = 0; i < m; ++i) {
    double nrm = A.row(i).norm();
    A.row(i) /= nrm;
    b(i) /= nrm;
  }
  VectorXd c = VectorXd::Zero(n + 1);
  c(n) = 1.0;
  VectorXd zt(n + 1);
  zt.head(n) = z;
  zt(n) = viol;
  CoreResult r = active_set(MatrixXd(), c, A, b, Aeq, zt, max_iter);
  out.iterations = r.iterations;
  if (r.status == CoreStatus::unbounded) return out;  // cannot happen: t >= 0
  out.z = r.z.head(n);
  // Tighten onto equalities; feasibility judged on the original rows.
  out.z = onto_equalities(np.Aeq, np.beq, out.z);
  out.feasible = max_violation(np.A, np.b, out.z) <= kPhaseOneTol;
  return out;
}

void finish(const QpProblem& prob, const Normalized& np, QpSolution& sol,
            const VectorXd& lam_norm, const VectorXd& nu_norm) {
  const int m = static_cast<int>(prob.A_in.rows());
  const int me = static_cast<int>(prob.A_eq.rows());
  sol.lambda_in = VectorXd::Zero(m);
  for (std::size_t k = 0; k < np.in_rows.size(); ++k) {
    int i = np.in_rows[k];
    if (lam_norm.size() > 0) sol.lambda_in(i) = lam_norm(static_cast<int>(k)) / np.scale(i);
  }
  sol.nu_eq = VectorXd::Zero(me);
  for (std::size_t k = 0; k < np.eq_rows.size(); ++k) {
    int i = np.eq_rows[k];
    if (nu_norm.size() > 0) sol.nu_eq(i) = nu_norm(static_cast<int>(k)) / np.eq_scale(i);
  }
  sol.value = prob.objective(sol.z);

  VectorXd Qz = np.Q * sol.z;
  VectorXd grad = Qz + prob.c;
  const double gscale =
      std::max({1.0, inf_norm(prob.c), inf_norm(Qz)});
  VectorXd stat = grad;
  if (m > 0) stat += prob.A_in.transpose() * sol.lambda_in;
  if (me > 0) stat += prob.A_eq.transpose() * sol.nu_eq;
  double res = inf_norm(stat) / gscale;
  for (std::size_t k = 0; k < np.in_rows.size(); ++k) {
    int i = np.in_rows[k];
    double slack = (prob.A_in.row(i).dot(sol.z) - prob.b_in(i)) / np.scale(i);
    res = std::max(res, slack);  // primal violation
    res = std::max(res, std::abs(sol.lambda_in(i) * np.scale(i) * slack) / gscale);
  }
  for (int i = 0; i < me; ++i) {
    double nrm = std::max(prob.A_eq.row(i).norm(), kRowZero);
    res = std::max(res, std::abs(prob.A_eq.row(i).dot(sol.z) - prob.b_eq(i)) / nrm);
  }
  sol.kkt_residual = res;
}

void check_shapes(const QpProblem& prob) {
  const int n = prob.dim();
  if (prob.Q.rows() != n || prob.Q.cols() != n)
    throw std::invalid_argument("solve_qp: Q must be n x n");
  if (prob.A_in.cols() != n && prob.A_in.rows() > 0)
    throw std::invalid_argument("solve_qp: A_in has wrong column count");
  if (prob.A_in.rows() != prob.b_in.size())
    throw std::invalid_argument("solve_qp: A_in/b_in row mismatch");
  if (prob.A_eq.cols() != n && prob.A_eq.rows() > 0)
    throw std::invalid_argument("solve_qp: A_eq has wrong column count");
  if (prob.A_eq.rows() != prob.b_eq.size())
    throw std::invalid_argument("solve_qp: A_eq/b_eq row mismatch");
  if (n > 0) {
    double asym = (prob.Q - prob.Q.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, prob.Q.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("solve_qp: Q is not symmetric");
  }
}

void check_psd(const Eigen::MatrixXd& Q) {
  if (Q.size() == 0 || Q.cwiseAbs().maxCoeff() == 0.0) return;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_qp: Q is not positive semidefinite");
}

QpSolution solve_impl(const QpProblem& prob,
                      const std::optional<VectorXd>& warm, bool feasibility_only) {
  check_shapes(prob);
  if (!feasibility_only) check_psd(prob.Q);
  const int n = prob.dim();
  const int max_iter =
      50 * (n + static_cast<int>(prob.A_in.rows() + prob.A_eq.rows())) + 50;

  Normalized np = normalize(prob);
  QpSolution sol;
  sol.z = warm && warm->size() == n ? *warm : VectorXd::Zero(n);
  if (np.trivially_infeasible) {
    sol.status = QpStatus::infeasible;
    sol.value = prob.objective(sol.z);
    return sol;
  }
  Phase1 p1 = phase_one(np, sol.z, max_iter, prob);
  sol.iterations = p1.iterations;
  if (!p1.feasible) {
    sol.status = QpStatus::infeasible;
    if (p1.z.size() == n) sol.z = p1.z;
    sol.value = prob.objective(sol.z);
    sol.lambda_in = VectorXd::Zero(prob.A_in.rows());
    sol.nu_eq = VectorXd::Zero(prob.A_eq.rows());
    return sol;
  }
  if (feasibility_only) {
    sol.z = p1.z;
    sol.status = QpStatus::optimal;
    sol.value = prob.objective(sol.z);
    sol.lambda_in = VectorXd::Zero(prob.A_in.rows());
    sol.nu_eq = VectorXd::Zero(prob.A_eq.rows());
    return sol;
  }
  CoreResult r =
      active_set(np.Q, np.c, np.A, np.b, np.Aeq, p1.z, max_iter - p1.iterations);
  sol.iterations += r.iterations;
  sol.z = r.z;
  switch (r.status) {
    case CoreStatus::optimal: sol.status = QpStatus::optimal; break;
    case CoreStatus::unbounded: sol.status = QpStatus::unbounded; break;
    case CoreStatus::max_iterations: sol.status = QpStatus::max_iterations; break;
  }
  finish(prob, np, sol, r.lambda, r.nu);
  return sol;
}

}  // namespace

QpProblem QpProblem::with_dim(int n) {
  QpProblem p;
  p.Q = MatrixXd::Zero(n, n);
  p.c = VectorXd::Zero(n);
  p.A_in.resize(0, n);
  p.b_in.resize(0);
  p.A_eq.resize(0, n);
  p.b_eq.resize(0);
  return p;
}

void QpProblem::add_inequality(const VectorXd& a, double b) {
  A_in.conservativeResize(A_in.rows() + 1, dim());
  A_in.row(A_in.rows() - 1) = a.transpose();
  b_in.conservativeResize(b_in.size() + 1);
  b_in(b_in.size() - 1) = b;
}

void QpProblem::add_equality(const VectorXd& a, double b) {
  A_eq.conservativeResize(A_eq.rows() + 1, dim());
  A_eq.row(A_eq.rows() - 1) = a.transpose();
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq(b_eq.size() - 1) = b;
}

double QpProblem::objective(const VectorXd& z) const {
  return 0.5 * z.dot(Q * z) + c.dot(z);
}

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::unbounded: return "unbounded";
    case QpStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

QpSolution solve_qp(const QpProblem& prob, const std::optional<VectorXd>& warm_start) {
  return solve_impl(prob, warm_start, false);
}

QpSolution find_feasible_point(const QpProblem& prob,
                               const std::optional<VectorXd>& warm_start) {
  return solve_impl(prob, warm_start, true);
}

VectorXd project_simplex(const VectorXd& p) {
  const int n = static_cast<int>(p.size());
  if (n == 0) return p;
  std::vector<double> u(p.data(), p.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (int j = 0; j < n; ++j) {
    cum += u[j];
    double t = (cum - 1.0) / (j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  VectorXd y = (p.array() - theta).cwiseMax(0.0).matrix();
  double total = y.sum();
  if (total > 0.0) y /= total;
  return y;
}

}  // namespace tariff
