#include <doctest.h>

#include <cstdio>
#include <random>
#include <string>

#include "support/oracles.hpp"
#include "tariff/generator.hpp"
#include "tariff/instance_io.hpp"
#include "tariff/qspc.hpp"
#include "tariff/report.hpp"

using namespace tariff;

namespace {

bool same_instance(const Instance& a, const Instance& b) {
  if (a.S != b.S || a.W != b.W || a.H != b.H) return false;
  for (int s = 0; s < a.S; ++s)
    if (a.E[s] != b.E[s]) return false;
  if (a.R != b.R || a.C != b.C || a.rho != b.rho) return false;
  if (a.X.lower != b.X.lower || a.X.upper != b.X.upper) return false;
  if (a.X.extra.size() != b.X.extra.size()) return false;
  for (std::size_t k = 0; k < a.X.extra.size(); ++k)
    if (a.X.extra[k].g != b.X.extra[k].g || a.X.extra[k].h != b.X.extra[k].h) return false;
  return true;
}

std::string error_of(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const InstanceFormatError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("instance json round trip is field-exact") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GeneratorConfig cfg;
    cfg.S = 4;
    cfg.seed = seed;
    cfg.offpeak_below_peak = seed == 2;
    Instance inst = generate(cfg);
    Instance back = parse_instance(dump_instance(inst));
    CHECK(same_instance(inst, back));
    CHECK(dump_instance(back) == dump_instance(inst));
  }
  Instance tiny = oracle::random_instance(5, {2, 2, 2});
  CHECK(same_instance(tiny, parse_instance(dump_instance(tiny))));

  const std::string path = "test_io_roundtrip.json";
  write_instance_file(tiny, path);
  CHECK(same_instance(tiny, read_instance_file(path)));
  std::remove(path.c_str());
}

TEST_CASE("malformed instances are diagnosed") {
  CHECK(contains(error_of("{\n  \"S\": 1,\n  \"W\": ]\n}"), "line 3"));
  CHECK(contains(error_of("[1, 2]"), "object"));
  CHECK(contains(error_of("{\"W\": 1, \"H\": 1}"), "'S'"));

  Instance inst = oracle::random_instance(6, {2, 2, 1});
  auto j = instance_to_json(inst);
  j["E"][1][0][0] = "x";
  CHECK(contains(error_of(j.dump()), "E[1][0][0]"));
  j = instance_to_json(inst);
  j["R"][0] = {1.0};
  CHECK(contains(error_of(j.dump()), "R[0]"));
  j = instance_to_json(inst);
  j["rho"] = {1.0};
  CHECK(contains(error_of(j.dump()), "rho"));
  j = instance_to_json(inst);
  j["extra_constraints"] = {{{"g", {1.0, 0.0}}}};
  CHECK(contains(error_of(j.dump()), "extra_constraints[0].h"));
  j = instance_to_json(inst);
  j["S"] = 1.5;
  CHECK(contains(error_of(j.dump()), "'S'"));
  CHECK_THROWS_AS(read_instance_file("/nonexistent/instance.json"), InstanceFormatError);
}

TEST_CASE("prices and cell systems serialise") {
  PriceVector x(2, 2);
  x.x << 1.0, 2.0, 3.0, 4.0;
  auto j = price_to_json(x);
  CHECK(j.dump() == "[[1.0,2.0],[3.0,4.0]]");
  CHECK(price_from_json(j, 2, 2).x == x.x);
  CHECK_THROWS_AS(price_from_json(j, 3, 2), InstanceFormatError);

  Instance inst = oracle::random_instance(7, {1, 1, 1});
  auto cj = cell_system_json(cell_system(inst, Pattern({{1, 1}}), 2.0));
  CHECK(cj["rows"].size() == 2 + 2);
  CHECK(cj["rows"][0]["side"] == "active");
  CHECK(cell_system_json(asymptotic_cell_system(inst, Pattern({{0, 1}})))["beta"] == "inf");
}

TEST_CASE("generator shape and determinism") {
  GeneratorConfig cfg;
  cfg.S = 6;
  cfg.seed = 42;
  Instance a = generate(cfg);
  Instance b = generate(cfg);
  CHECK(dump_instance(a) == dump_instance(b));
  CHECK(a.H == 3);
  CHECK(a.W == 4);
  CHECK(validate(a).empty());
  CHECK(a.rho.sum() == doctest::Approx(1.0));
  CHECK(a.rho.minCoeff() > 0.0);
  for (int s = 0; s < a.S; ++s)
    for (int w = 0; w < a.W; ++w) CHECK(a.E[s](w, 2) == 1.0);
  cfg.seed = 43;
  CHECK(dump_instance(generate(cfg)) != dump_instance(a));
  cfg.S = 0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.load_shift = 1.5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}

TEST_CASE("reservation bills follow the six competitor offers") {
  GeneratorConfig cfg;
  cfg.S = 1;
  cfg.seed = 7;
  Instance inst = generate(cfg);
  // Recover the drawn consumption from the base contract row and the shifted one.
  const double total = inst.E[0](0, 0);
  const double shifted_peak = inst.E[0](1, 0);
  const double peak = shifted_peak / (1.0 - cfg.load_shift);
  const double off = total - peak;
  struct Offer { double peak, off, fixed; bool single; };
  const Offer offers[6] = {{0.174, 0.174, 136, true},   {0.1819, 0.1819, 136, true},
                           {0.1840, 0.147, 144, false}, {0.19, 0.155, 144, false},
                           {0.166, 0.166, 148, true},   {0.23, 0.135, 141, false}};
  double best = 1e300;
  for (const auto& o : offers) {
    double bill = o.single ? o.peak * (peak + off) + o.fixed
                           : o.peak * 0.85 * peak + o.off * (off + 0.15 * peak) + o.fixed;
    best = std::min(best, bill);
  }
  CHECK(inst.R(0, 0) == doctest::Approx(best).epsilon(1e-12));
  CHECK(inst.R(0, 1) == doctest::Approx(best).epsilon(1e-12));
  CHECK(inst.R(0, 2) >= inst.R(0, 0));
  CHECK(inst.C(0, 0) == doctest::Approx(0.135 * total + 60.0));
  CHECK(inst.C(0, 2) == doctest::Approx(0.143 * total + 60.0));
  CHECK(default_competitors().size() == 6);
}

TEST_CASE("zero load shift keeps the base split") {
  GeneratorConfig cfg;
  cfg.S = 3;
  cfg.load_shift = 0.0;
  Instance inst = generate(cfg);
  for (int s = 0; s < inst.S; ++s)
    CHECK(inst.E[s](1, 0) + inst.E[s](1, 1) == doctest::Approx(inst.E[s](0, 0)));
}

TEST_CASE("off-peak below peak adds one row per time-of-use contract") {
  GeneratorConfig cfg;
  cfg.S = 2;
  cfg.offpeak_below_peak = true;
  Instance inst = generate(cfg);
  CHECK(inst.X.extra.size() == 2);
  CHECK(inst.X.contains(inst.X.midpoint()));
}

TEST_CASE("reports are byte-identical and re-validate") {
  GeneratorConfig cfg;
  cfg.S = 3;
  cfg.n_company_contracts = 2;
  cfg.seed = 11;
  Instance inst = generate(cfg);
  QspcOptions o;
  o.rng_seed = 3;
  ReportContext ctx{ResponseModel::quad, "qspc", 0.2, 3};
  SolveReport a = qspc(inst, 0.2, {}, o);
  SolveReport b = qspc(inst, 0.2, {}, o);
  CHECK(report_string(inst, a, ctx) == report_string(inst, b, ctx));
  CHECK(check_incumbent(inst, a, ctx).empty());
  auto j = report_json(inst, a, ctx);
  CHECK(j["schema_version"] == 1);
  CHECK(j.contains("value"));
  CHECK(j.contains("pattern"));
  CHECK(j.contains("prices"));
  CHECK(j.contains("response"));
  CHECK(j.contains("log"));
  CHECK_FALSE(j.contains("bound"));
  CHECK(j["log"][0]["pattern_hash"].get<std::string>().size() == 16);

  SolveReport bad = a;
  bad.objective += 1.0;
  CHECK_FALSE(check_incumbent(inst, bad, ctx).empty());
  bad = a;
  bad.x.x(0, 0) = -1.0;
  CHECK_FALSE(check_incumbent(inst, bad, ctx).empty());

  SolveReport det = solve_det(inst);
  ReportContext dctx{ResponseModel::det, "bnb", 0.0, 0};
  CHECK(check_incumbent(inst, det, dctx, 1e-7).empty());
  CHECK_FALSE(report_json(inst, det, dctx).contains("beta"));
}
