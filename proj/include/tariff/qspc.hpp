#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tariff/bnb.hpp"
#include "tariff/complex.hpp"
#include "tariff/model.hpp"
#include "tariff/response.hpp"

namespace tariff {

enum class NeighborMode { per_pattern_qp, restricted_miqp };

struct QspcOptions {
  int r_max = 3;
  int gamma_S = 1;
  int gamma_W = 1;
  double sigma = 0.05;
  NeighborMode neighbor_mode = NeighborMode::per_pattern_qp;
  std::uint64_t rng_seed = 0;
  int threads = 1;
  /// Options of the restart (and restricted neighbour) MIQPs.
  SolveOptions miqp{1e-4, 600.0, -1, 0};
  /// Safety cap on descent steps plus restarts.
  long max_steps = 100000;

  /// Throws std::invalid_argument on out-of-range values for the instance.
  void check(const Instance& inst) const;
};

/// A pattern with the cell optimum found for it.
struct QspcPoint {
  Pattern pattern;
  PriceVector x;
  double value = 0.0;
};

struct ExploreResult {
  QspcPoint best;
  bool improved = false;
  int candidates = 0;
  int infeasible = 0;
};

/// One pass over the pivot neighbours of `current`. Returns the incumbent
/// unless a candidate is better by more than 1e-9.
ExploreResult explore_good_neighbors(const Instance& inst, const Beta& beta,
                                     const QspcPoint& current, NeighborMode mode,
                                     int threads = 1,
                                     const SolveOptions& miqp = {1e-4, 600.0, -1, 0});

struct RestartResult {
  QspcPoint best;
  bool improved = false;
  bool hit_limit = false;
  ZFixing fixing;
};

/// Frees gamma_S rows, gamma_W contract columns and each other entry with
/// probability sigma, then solves the restricted MIQP.
RestartResult miqp_restart(const Instance& inst, const Beta& beta,
                           const QspcPoint& current, const QspcOptions& opts,
                           std::mt19937_64& rng);

/// Cell optimum of the pattern at `start` (box midpoint when absent, moved
/// onto the polytope when outside it).
QspcPoint qspc_start(const Instance& inst, const Beta& beta,
                     const std::optional<PriceVector>& start = {});

/// Alternates neighbour descent and MIQP restarts. The log holds phi* after
/// every step and is non-decreasing.
SolveReport qspc(const Instance& inst, const Beta& beta,
                 const std::optional<PriceVector>& start = {},
                 const QspcOptions& opts = {});

}  // namespace tariff
