#pragma once

// Reference implementations used only by tests. They follow different
// numerical routes from the library so that agreement is informative.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tariff/model.hpp"
#include "tariff/response.hpp"
#include "tariff/subqp.hpp"

namespace oracle {

using tariff::Instance;
using tariff::Pattern;
using tariff::PriceVector;

struct TinySpec {
  int S = 2;
  int W = 2;
  int H = 2;
};

/// Small random instance with prices in [0, 4], consumption in [0.5, 2] and
/// reservation bills that make purchases attractive somewhere in the box.
Instance random_instance(std::uint64_t seed, TinySpec shape);

/// The 20-instance desk set: S <= 3, W <= 2, H <= 2.
std::vector<Instance> tiny_set();

PriceVector random_price(const Instance& inst, std::mt19937_64& rng);

/// Projection onto the simplex by bisection on the threshold, in long double.
Eigen::VectorXd project_simplex_bisect(const Eigen::VectorXd& p);

/// Logit row evaluated in long double straight from the formula.
Eigen::VectorXd logit_row_ld(const Eigen::VectorXd& V, double beta);

/// quad profit from the bisection projection.
double quad_profit_ref(const Instance& inst, const PriceVector& x, double beta);

/// Projected gradient on min 1/2 z'Qz + c'z over a box.
Eigen::VectorXd projected_gradient_box(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                       int iterations);

/// Best value over every (2^(W+1)-1)^S pattern of solve_cell on feasible
/// cells, enumerated independently of the library's enumerator.
struct EnumResult {
  double value = 0.0;
  PriceVector x;
  Pattern pattern;
  int feasible = 0;
};
EnumResult best_over_patterns(const Instance& inst, double beta);
EnumResult best_over_pure_asymptotic(const Instance& inst);

/// Every pattern of the instance shape (feasible or not).
std::vector<Pattern> all_patterns(int S, int options);

/// Points strictly inside the cell: the Chebyshev centre plus random points of
/// the inscribed ball shrunk by `shrink`. Empty when the cell has no interior.
std::vector<PriceVector> interior_points(const Instance& inst, const Pattern& p, double beta,
                                         int count, std::mt19937_64& rng,
                                         double shrink = 0.5);

}  // namespace oracle
