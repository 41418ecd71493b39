#include "tariff/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace tariff {
namespace {

// Raw 64-bit draws only, so the stream is identical across standard libraries.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int index(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
  double exponential() { return -std::log1p(-unit()); }
};

struct ContractKind {
  bool peak_offpeak;
  bool green;
};

constexpr ContractKind kContracts[4] = {
    {false, false}, {true, false}, {false, true}, {true, true}};

void check_range(const std::array<double, 2>& r, const char* name) {
  if (!(r[0] <= r[1]) || !std::isfinite(r[0]) || !std::isfinite(r[1]))
    throw std::invalid_argument(std::string("generator: ") + name + " must satisfy lo <= hi");
}

}  // namespace

void GeneratorConfig::check() const {
  if (S < 1) throw std::invalid_argument("generator: S must be >= 1");
  if (n_company_contracts < 1 || n_company_contracts > 4)
    throw std::invalid_argument("generator: n_company_contracts must lie in [1, 4]");
  if (n_competitors < 1 || n_competitors > static_cast<int>(default_competitors().size()))
    throw std::invalid_argument("generator: n_competitors must lie in [1, 6]");
  if (!(load_shift >= 0.0 && load_shift <= 1.0))
    throw std::invalid_argument("generator: load_shift must lie in [0, 1]");
  if (green_uplifts.empty()) throw std::invalid_argument("generator: green_uplifts is empty");
  for (double u : green_uplifts)
    if (!(u >= 0.0)) throw std::invalid_argument("generator: green uplifts must be >= 0");
  if (!(peak_kwh[0] >= 0.0) || !(offpeak_kwh[0] >= 0.0))
    throw std::invalid_argument("generator: consumption must be >= 0");
  check_range(peak_kwh, "peak_kwh");
  check_range(offpeak_kwh, "offpeak_kwh");
  check_range(peak_price, "peak_price");
  check_range(offpeak_price, "offpeak_price");
  check_range(fixed_price, "fixed_price");
  if (!(rho_scale > 0.0)) throw std::invalid_argument("generator: rho_scale must be > 0");
}

const std::vector<CompetitorOffer>& default_competitors() {
  static const std::vector<CompetitorOffer> offers = {
      {0.174, 0.174, 136.0, false, true},   {0.1819, 0.1819, 136.0, true, true},
      {0.1840, 0.147, 144.0, false, false}, {0.19, 0.155, 144.0, true, false},
      {0.166, 0.166, 148.0, false, true},   {0.23, 0.135, 141.0, false, false},
  };
  return offers;
}

double competitor_bill(const CompetitorOffer& offer, double peak_kwh, double offpeak_kwh,
                       double load_shift) {
  if (offer.single_rate) return offer.peak * (peak_kwh + offpeak_kwh) + offer.fixed;
  const double shifted = load_shift * peak_kwh;
  return offer.peak * (peak_kwh - shifted) + offer.offpeak * (offpeak_kwh + shifted) +
         offer.fixed;
}

Instance generate(const GeneratorConfig& cfg) {
  cfg.check();
  Rng rng(cfg.seed);
  Instance inst;
  inst.S = cfg.S;
  inst.W = cfg.n_company_contracts;
  inst.H = 3;
  inst.R.resize(inst.S, inst.W);
  inst.C.resize(inst.S, inst.W);
  inst.rho.resize(inst.S);

  const auto& offers = default_competitors();
  for (int s = 0; s < inst.S; ++s) {
    const double peak = rng.uniform(cfg.peak_kwh[0], cfg.peak_kwh[1]);
    const double off = rng.uniform(cfg.offpeak_kwh[0], cfg.offpeak_kwh[1]);
    const double uplift = cfg.green_uplifts[rng.index(static_cast<int>(cfg.green_uplifts.size()))];
    inst.rho(s) = rng.exponential();

    double reference = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.n_competitors; ++k)
      reference = std::min(reference, competitor_bill(offers[k], peak, off, cfg.load_shift));

    PriceMatrix E(inst.W, inst.H);
    for (int w = 0; w < inst.W; ++w) {
      const ContractKind kind = kContracts[w];
      if (kind.peak_offpeak) {
        const double shifted = cfg.load_shift * peak;
        E(w, 0) = peak - shifted;
        E(w, 1) = off + shifted;
      } else {
        E(w, 0) = peak + off;
        E(w, 1) = 0.0;
      }
      E(w, 2) = 1.0;
      const double kwh = peak + off;
      inst.R(s, w) = reference * (1.0 + (kind.green ? uplift : 0.0));
      inst.C(s, w) = (cfg.energy_cost + cfg.network_cost + (kind.green ? cfg.green_premium : 0.0)) *
                         kwh +
                     cfg.fixed_cost;
    }
    inst.E.push_back(std::move(E));
  }
  inst.rho *= cfg.rho_scale / inst.rho.sum();

  inst.X.lower.resize(inst.W, inst.H);
  inst.X.upper.resize(inst.W, inst.H);
  for (int w = 0; w < inst.W; ++w) {
    inst.X.lower.row(w) << cfg.peak_price[0], cfg.offpeak_price[0], cfg.fixed_price[0];
    inst.X.upper.row(w) << cfg.peak_price[1], cfg.offpeak_price[1], cfg.fixed_price[1];
    if (cfg.offpeak_below_peak && kContracts[w].peak_offpeak) {
      LinearConstraint c;
      c.g.assign(inst.price_dim(), 0.0);
      c.g[w * inst.H + 0] = -1.0;
      c.g[w * inst.H + 1] = 1.0;
      inst.X.extra.push_back(std::move(c));
    }
  }
  return inst;
}

}  // namespace tariff
