#include "tariff/report.hpp"

#include <cmath>

#include "tariff/instance_io.hpp"

namespace tariff {
namespace {

using nlohmann::json;

const char* model_name(ResponseModel m) {
  switch (m) {
    case ResponseModel::det: return "det";
    case ResponseModel::logit: return "logit";
    case ResponseModel::quad: return "quad";
  }
  return "?";
}

char hex_digit(unsigned v) { return "0123456789abcdef"[v & 15u]; }

std::string hex64(std::uint64_t h) {
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = hex_digit(static_cast<unsigned>(h));
  return s;
}

double model_profit(const Instance& inst, const PriceVector& x, const ReportContext& ctx) {
  switch (ctx.model) {
    case ResponseModel::det: return det_profit(inst, x);
    case ResponseModel::logit: return logit_profit(inst, x, ctx.beta);
    case ResponseModel::quad: return quad_profit(inst, x, ctx.beta);
  }
  return 0.0;
}

}  // namespace

json report_json(const Instance& inst, const SolveReport& rep, const ReportContext& ctx) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = model_name(ctx.model);
  j["method"] = ctx.method;
  if (ctx.model != ResponseModel::det) j["beta"] = ctx.beta;
  j["seed"] = ctx.seed;
  j["dims"] = {{"S", inst.S}, {"W", inst.W}, {"H", inst.H}};
  j["status"] = std::string(to_string(rep.status));
  j["has_incumbent"] = rep.has_incumbent;
  j["nodes"] = rep.nodes;
  if (std::isfinite(rep.bound)) j["bound"] = rep.bound;
  if (std::isfinite(rep.gap)) j["gap"] = rep.gap;
  if (rep.has_incumbent) {
    j["value"] = rep.objective;
    j["pattern"] = rep.pattern.rows();
    j["pattern_string"] = rep.pattern.to_string();
    j["prices"] = price_to_json(rep.x);
    json resp = json::array();
    for (int s = 0; s < rep.response.ybar.rows(); ++s) {
      json row = json::array();
      for (int w = 0; w < rep.response.ybar.cols(); ++w) row.push_back(rep.response.ybar(s, w));
      resp.push_back(std::move(row));
    }
    j["response"] = std::move(resp);
  }
  json log = json::array();
  for (const auto& r : rep.log)
    log.push_back({{"phase", r.phase},
                   {"pattern_hash", hex64(r.pattern_hash)},
                   {"value", r.value},
                   {"iteration", r.iteration}});
  j["log"] = std::move(log);
  return j;
}

std::string report_string(const Instance& inst, const SolveReport& rep,
                          const ReportContext& ctx) {
  return report_json(inst, rep, ctx).dump(2) + "\n";
}

std::vector<std::string> check_incumbent(const Instance& inst, const SolveReport& rep,
                                         const ReportContext& ctx, double tol) {
  std::vector<std::string> out;
  if (!rep.has_incumbent) return out;
  if (!inst.X.contains(rep.x)) out.push_back("prices outside the polytope");
  if (!rep.response.rows_on_simplex(1e-9)) out.push_back("response rows off the simplex");
  const double v = model_profit(inst, rep.x, ctx);
  const double scale = std::max(1.0, std::abs(rep.objective));
  // The optimistic choice at a tie may exceed the value of the solved cell.
  const bool ok = ctx.model == ResponseModel::det ? v >= rep.objective - tol * scale
                                                  : std::abs(v - rep.objective) <= tol * scale;
  if (!ok) out.push_back("recomputed profit differs from the reported value");
  return out;
}

}  // namespace tariff
