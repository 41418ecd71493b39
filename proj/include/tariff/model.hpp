#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tariff {

/// Tolerance on price-polytope membership.
inline constexpr double kFeasTol = 1e-8;

/// W x H matrix stored row-major so that the flat index of (w, h) is w*H + h.
using PriceMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The leader's decision: one row of H price coefficients per contract.
struct PriceVector {
  PriceMatrix x;

  PriceVector() = default;
  explicit PriceVector(PriceMatrix m) : x(std::move(m)) {}
  PriceVector(int W, int H) : x(PriceMatrix::Zero(W, H)) {}

  int contracts() const { return static_cast<int>(x.rows()); }
  int attributes() const { return static_cast<int>(x.cols()); }

  Eigen::Map<const Eigen::VectorXd> flat() const {
    return {x.data(), x.size()};
  }
  static PriceVector from_flat(const Eigen::VectorXd& v, int W, int H);
};

/// Linear inequality <g, x> <= h over the flattened price vector.
struct LinearConstraint {
  std::vector<double> g;
  double h = 0.0;
};

/// The box [lower, upper] intersected with optional extra inequalities.
struct PricePolytope {
  PriceMatrix lower;
  PriceMatrix upper;
  std::vector<LinearConstraint> extra;

  bool contains(const PriceVector& p, double tol = kFeasTol) const;
  PriceVector midpoint() const;
};

struct Instance {
  int S = 0;
  int W = 0;
  int H = 0;
  std::vector<PriceMatrix> E;  // S entries, each W x H
  Eigen::MatrixXd R;           // S x W reservation bills
  Eigen::MatrixXd C;           // S x W service costs
  Eigen::VectorXd rho;         // S segment weights
  PricePolytope X;

  int price_dim() const { return W * H; }
};

/// Affine function of the flattened price vector: <grad, x> + constant.
struct AffineForm {
  Eigen::VectorXd grad;
  double constant = 0.0;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return grad.dot(x) + constant;
  }
};

/// theta_sw(x) = <E_sw, x_w>.
double bill(const Instance& inst, int s, int w, const PriceVector& x);

/// Disutilities of segment s over {no-purchase, contracts}; entry 0 is 0.
/// Contract w (1-based in the returned vector) maps to instance column w-1.
Eigen::VectorXd disutility(const Instance& inst, int s, const PriceVector& x);

/// V_sw as an affine form over the flat price vector. Option 0 is the zero
/// form; option w >= 1 is contract w-1.
AffineForm disutility_form(const Instance& inst, int s, int option);

/// theta_sw - C_sw as an affine form (option >= 1).
AffineForm margin_form(const Instance& inst, int s, int option);

struct Violation {
  std::string message;
};

/// Structural and numerical checks. Never throws; an empty list means valid.
std::vector<Violation> validate(const Instance& inst);

/// S x (W+1) binary matrix of active options; column 0 is no-purchase.
class Pattern {
 public:
  Pattern() = default;
  /// Throws std::invalid_argument when a row has no active option.
  explicit Pattern(const std::vector<std::vector<int>>& rows);

  /// Pattern with a single active option per segment.
  static Pattern pure(const std::vector<int>& choice, int options);

  int segments() const { return segments_; }
  int options() const { return options_; }
  bool active(int s, int w) const { return cells_[index(s, w)] != 0; }
  int row_count(int s) const;
  int total() const;
  bool is_pure() const { return total() == segments_; }

  /// Copy with entry (s, w) toggled. Throws if the row would become empty.
  Pattern flipped(int s, int w) const;

  std::vector<std::vector<int>> rows() const;
  std::uint64_t hash() const;
  std::string to_string() const;

  auto operator<=>(const Pattern&) const = default;
  bool operator==(const Pattern&) const = default;

 private:
  std::size_t index(int s, int w) const {
    return static_cast<std::size_t>(s) * options_ + w;
  }

  int segments_ = 0;
  int options_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Per-segment probability rows over {no-purchase, contracts}.
struct ResponseMatrix {
  Eigen::MatrixXd ybar;  // S x (W+1)

  /// True when every row is nonnegative and sums to one within tol.
  bool rows_on_simplex(double tol = 1e-9) const;
};

}  // namespace tariff
