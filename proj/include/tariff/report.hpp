#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tariff/bnb.hpp"
#include "tariff/model.hpp"
#include "tariff/response.hpp"

namespace tariff {

inline constexpr int kReportSchemaVersion = 1;

enum class ResponseModel { det, logit, quad };

struct ReportContext {
  ResponseModel model = ResponseModel::quad;
  std::string method;
  double beta = 0.0;  // ignored for det
  std::uint64_t seed = 0;
};

/// Machine-readable solve report. Wall time is left out so that equal inputs
/// give byte-identical output.
nlohmann::json report_json(const Instance& inst, const SolveReport& rep,
                           const ReportContext& ctx);
std::string report_string(const Instance& inst, const SolveReport& rep,
                          const ReportContext& ctx);

/// Re-validates an incumbent: polytope membership, simplex rows and the
/// recomputed profit of the model within tol of the reported value.
std::vector<std::string> check_incumbent(const Instance& inst, const SolveReport& rep,
                                         const ReportContext& ctx, double tol = 1e-8);

}  // namespace tariff
