#include "tariff/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tariff/subqp.hpp"

namespace tariff {

PriceVector PriceVector::from_flat(const Eigen::VectorXd& v, int W, int H) {
  if (v.size() != static_cast<Eigen::Index>(W) * H)
    throw std::invalid_argument("PriceVector::from_flat: size mismatch");
  PriceVector p(W, H);
  for (int w = 0; w < W; ++w)
    for (int h = 0; h < H; ++h) p.x(w, h) = v(w * H + h);
  return p;
}

bool PricePolytope::contains(const PriceVector& p, double tol) const {
  if (p.x.rows() != lower.rows() || p.x.cols() != lower.cols()) return false;
  if (((lower - p.x).array() > tol).any()) return false;
  if (((p.x - upper).array() > tol).any()) return false;
  auto flat = p.flat();
  for (const auto& row : extra) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < row.g.size(); ++k) lhs += row.g[k] * flat(static_cast<int>(k));
    if (lhs - row.h > tol) return false;
  }
  return true;
}

PriceVector PricePolytope::midpoint() const {
  return PriceVector(PriceMatrix(0.5 * (lower + upper)));
}

double bill(const Instance& inst, int s, int w, const PriceVector& x) {
  return inst.E[s].row(w).dot(x.x.row(w));
}

Eigen::VectorXd disutility(const Instance& inst, int s, const PriceVector& x) {
  Eigen::VectorXd v(inst.W + 1);
  v(0) = 0.0;
  for (int w = 0; w < inst.W; ++w) v(w + 1) = bill(inst, s, w, x) - inst.R(s, w);
  return v;
}

AffineForm disutility_form(const Instance& inst, int s, int option) {
  AffineForm f{Eigen::VectorXd::Zero(inst.price_dim()), 0.0};
  if (option == 0) return f;
  const int w = option - 1;
  for (int h = 0; h < inst.H; ++h) f.grad(w * inst.H + h) = inst.E[s](w, h);
  f.constant = -inst.R(s, w);
  return f;
}

AffineForm margin_form(const Instance& inst, int s, int option) {
  if (option == 0) throw std::invalid_argument("margin_form: no-purchase has no margin");
  AffineForm f = disutility_form(inst, s, option);
  f.constant = -inst.C(s, option - 1);
  return f;
}

std::vector<Violation> validate(const Instance& inst) {
  std::vector<Violation> out;
  auto fail = [&](std::string msg) { out.push_back({std::move(msg)}); };

  if (inst.S < 1) fail("S must be >= 1");
  if (inst.W < 1) fail("W must be >= 1");
  if (inst.H < 1) fail("H must be >= 1");
  if (!out.empty()) return out;

  if (static_cast<int>(inst.E.size()) != inst.S) {
    fail("E has " + std::to_string(inst.E.size()) + " segments, expected S");
  } else {
    for (int s = 0; s < inst.S; ++s) {
      if (inst.E[s].rows() != inst.W || inst.E[s].cols() != inst.H) {
        fail("E[" + std::to_string(s) + "] is not W x H");
        continue;
      }
      for (int w = 0; w < inst.W; ++w)
        for (int h = 0; h < inst.H; ++h) {
          double e = inst.E[s](w, h);
          std::string at = "E[" + std::to_string(s) + "][" + std::to_string(w) +
                           "][" + std::to_string(h) + "]";
          if (!std::isfinite(e)) fail(at + " is not finite");
          else if (e < 0.0) fail(at + " < 0");
        }
    }
  }
  if (inst.R.rows() != inst.S || inst.R.cols() != inst.W) fail("R is not S x W");
  else if (!inst.R.allFinite()) fail("R has non-finite entries");
  if (inst.C.rows() != inst.S || inst.C.cols() != inst.W) fail("C is not S x W");
  else if (!inst.C.allFinite()) fail("C has non-finite entries");
  if (inst.rho.size() != inst.S) {
    fail("rho has wrong length");
  } else {
    for (int s = 0; s < inst.S; ++s)
      if (!(inst.rho(s) > 0.0)) fail("rho[" + std::to_string(s) + "] must be > 0");
  }

  const auto& X = inst.X;
  bool box_ok = X.lower.rows() == inst.W && X.lower.cols() == inst.H &&
                X.upper.rows() == inst.W && X.upper.cols() == inst.H;
  if (!box_ok) {
    fail("price bounds are not W x H");
    return out;
  }
  if (!X.lower.allFinite() || !X.upper.allFinite()) {
    fail("price bounds must be finite");
    return out;
  }
  for (std::size_t k = 0; k < X.extra.size(); ++k)
    if (static_cast<int>(X.extra[k].g.size()) != inst.price_dim())
      fail("extra_constraints[" + std::to_string(k) + "].g has wrong length");
  if (((X.lower - X.upper).array() > 0.0).any()) {
    fail("empty polytope");
    return out;
  }
  if (!out.empty()) return out;

  if (!X.extra.empty()) {
    const int n = inst.price_dim();
    QpProblem lp = QpProblem::with_dim(n);
    auto lo = Eigen::Map<const Eigen::VectorXd>(X.lower.data(), n);
    auto hi = Eigen::Map<const Eigen::VectorXd>(X.upper.data(), n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
      lp.add_inequality(e, hi(i));
      lp.add_inequality(-e, -lo(i));
    }
    for (const auto& row : X.extra)
      lp.add_inequality(Eigen::Map<const Eigen::VectorXd>(row.g.data(), n), row.h);
    if (!find_feasible_point(lp).optimal()) fail("empty polytope");
  }
  return out;
}

Pattern::Pattern(const std::vector<std::vector<int>>& rows) {
  segments_ = static_cast<int>(rows.size());
  options_ = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  cells_.reserve(static_cast<std::size_t>(segments_) * options_);
  for (int s = 0; s < segments_; ++s) {
    if (static_cast<int>(rows[s].size()) != options_)
      throw std::invalid_argument("Pattern: ragged rows");
    bool any = false;
    for (int v : rows[s]) {
      cells_.push_back(v != 0 ? 1 : 0);
      any = any || v != 0;
    }
    if (!any)
      throw std::invalid_argument("Pattern: row " + std::to_string(s) +
                                  " has no active option");
  }
}

Pattern Pattern::pure(const std::vector<int>& choice, int options) {
  std::vector<std::vector<int>> rows(choice.size(), std::vector<int>(options, 0));
  for (std::size_t s = 0; s < choice.size(); ++s) rows[s].at(choice[s]) = 1;
  return Pattern(rows);
}

int Pattern::row_count(int s) const {
  int k = 0;
  for (int w = 0; w < options_; ++w) k += cells_[index(s, w)];
  return k;
}

int Pattern::total() const {
  int k = 0;
  for (auto c : cells_) k += c;
  return k;
}

Pattern Pattern::flipped(int s, int w) const {
  Pattern out = *this;
  out.cells_[index(s, w)] ^= 1;
  if (out.row_count(s) == 0)
    throw std::invalid_argument("Pattern::flipped: row would become empty");
  return out;
}

std::vector<std::vector<int>> Pattern::rows() const {
  std::vector<std::vector<int>> out(segments_, std::vector<int>(options_));
  for (int s = 0; s < segments_; ++s)
    for (int w = 0; w < options_; ++w) out[s][w] = cells_[index(s, w)];
  return out;
}

std::uint64_t Pattern::hash() const {
  // FNV-1a over the cells plus the shape.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(segments_));
  mix(static_cast<std::uint64_t>(options_));
  for (auto c : cells_) mix(c);
  return h;
}

std::string Pattern::to_string() const {
  std::ostringstream os;
  for (int s = 0; s < segments_; ++s) {
    if (s) os << '|';
    for (int w = 0; w < options_; ++w) os << static_cast<int>(cells_[index(s, w)]);
  }
  return os.str();
}

bool ResponseMatrix::rows_on_simplex(double tol) const {
  for (int s = 0; s < ybar.rows(); ++s) {
    if (ybar.row(s).minCoeff() < -tol) return false;
    if (std::abs(ybar.row(s).sum() - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace tariff
