#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tariff/model.hpp"

namespace tariff {

/// Synthetic electricity-retail instances with attributes (peak, off-peak,
/// fixed part). Company contracts, in order: base standard, peak/off-peak
/// standard, base green, peak/off-peak green.
struct GeneratorConfig {
  int S = 10;
  int n_company_contracts = 4;  // 1..4, a prefix of the list above
  int n_competitors = 6;        // 1..6, a prefix of the built-in offers
  std::uint64_t seed = 0;

  std::array<double, 2> peak_kwh{1000.0, 6000.0};
  std::array<double, 2> offpeak_kwh{800.0, 5000.0};
  double load_shift = 0.15;
  /// Fraction of the reference bill added for green contracts, one entry per
  /// preference level; each segment draws a level uniformly.
  std::vector<double> green_uplifts{0.04, 0.02, 0.0};

  double energy_cost = 0.09;   // per kWh
  double network_cost = 0.045; // per kWh
  double fixed_cost = 60.0;    // per year
  double green_premium = 0.008;  // per kWh, green contracts only

  double rho_scale = 1.0;  // weights sum to this value

  std::array<double, 2> peak_price{0.10, 0.30};
  std::array<double, 2> offpeak_price{0.08, 0.25};
  std::array<double, 2> fixed_price{80.0, 200.0};
  bool offpeak_below_peak = false;

  /// Throws std::invalid_argument when a field is out of range.
  void check() const;
};

/// A competitor offer; single-rate offers use the same price in both periods.
struct CompetitorOffer {
  double peak = 0.0;
  double offpeak = 0.0;
  double fixed = 0.0;
  bool green = false;
  bool single_rate = false;
};

const std::vector<CompetitorOffer>& default_competitors();

/// Annual bill of an offer for a (peak, off-peak) consumption; peak/off-peak
/// offers see the shifted profile.
double competitor_bill(const CompetitorOffer& offer, double peak_kwh, double offpeak_kwh,
                       double load_shift);

Instance generate(const GeneratorConfig& cfg);

}  // namespace tariff
