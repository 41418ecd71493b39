#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tariff/complex.hpp"
#include "tariff/model.hpp"
#include "tariff/response.hpp"

namespace tariff {

/// Complementarity constants: M_s0 per segment, M_sw per (segment, contract).
struct BigM {
  Eigen::VectorXd M0;  // S
  Eigen::MatrixXd M;   // S x W
};

BigM bigm_det(const Instance& inst);
BigM bigm_quad(const Instance& inst, const Beta& beta);

struct SolveOptions {
  double gap = 3e-2;
  double time_limit_s = 3600.0;
  long node_limit = -1;  // negative: unlimited
  int trace_level = 0;
};

/// `heuristic` marks reports of local search, which carry no bound.
enum class SolveStatus { optimal, gap_reached, time_limit, node_limit, heuristic };
std::string_view to_string(SolveStatus status);

/// One line of a solver trace. `iteration` replaces wall time so that logs are
/// reproducible.
struct LogRecord {
  std::string phase;
  std::uint64_t pattern_hash = 0;
  double value = 0.0;
  long iteration = 0;
};

struct SolveReport {
  bool has_incumbent = false;
  PriceVector x;
  ResponseMatrix response;
  Pattern pattern;
  double objective = 0.0;
  /// Upper bound on the optimum (maximisation); +inf when unknown.
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  double wall_time = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::vector<LogRecord> log;
};

double relative_gap(double bound, double objective);

/// Per-(s, option) fixing of the support indicator z: -1 free, 0 or 1.
using ZFixing = std::vector<std::vector<int>>;

/// Deterministic optimistic model by branch-and-bound on one-hot responses.
SolveReport solve_det(const Instance& inst, const SolveOptions& opts = {1e-6});

/// Regularised model by branch-and-bound on the support indicators z.
/// A fixed 0 forces y_sw = 0; a fixed 1 forces the complementary slack to 0.
SolveReport solve_quad(const Instance& inst, const Beta& beta,
                       const SolveOptions& opts = {},
                       const std::optional<ZFixing>& fixed_z = {});

/// Every feasible pattern, in lexicographic order of to_string().
/// Throws std::length_error when more than max_patterns candidates exist.
std::vector<Pattern> enumerate_patterns(const Instance& inst, const Beta& beta,
                                        long max_patterns);

/// Exhaustive maximum of solve_cell over all feasible patterns.
SolveReport enumerate_quad(const Instance& inst, const Beta& beta,
                           long max_patterns = 1'000'000);

/// Exhaustive maximum over pure patterns of the asymptotic-cell LP.
SolveReport enumerate_det(const Instance& inst, long max_patterns = 1'000'000);

}  // namespace tariff
