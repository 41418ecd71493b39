// Command-line front end for the tariff solvers.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tariff/analysis.hpp"
#include "tariff/bnb.hpp"
#include "tariff/generator.hpp"
#include "tariff/instance_io.hpp"
#include "tariff/qspc.hpp"
#include "tariff/report.hpp"

namespace {

using namespace tariff;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNoIncumbent = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int trace_level() {
  const char* v = std::getenv("TARIFF_COMPLEX_LOG");
  return v ? std::atoi(v) : 0;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

/// Loads and validates; violations are printed and reported as UsageError.
Instance load(const std::string& path) {
  Instance inst = read_instance_file(path);
  auto v = validate(inst);
  if (!v.empty()) {
    std::string msg = "invalid instance '" + path + "':";
    for (const auto& e : v) msg += "\n  " + e.message;
    throw InstanceFormatError(msg);
  }
  return inst;
}

PriceVector load_prices(const std::string& path, const Instance& inst) {
  std::ifstream in(path);
  if (!in) throw InstanceFormatError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceFormatError("'" + path + "': " + e.what());
  }
  // Either a bare W x H matrix or a solve report with a "prices" field.
  if (j.is_object()) {
    if (!j.contains("prices")) throw InstanceFormatError("'" + path + "': no \"prices\" field");
    j = j["prices"];
  }
  return price_from_json(j, inst.W, inst.H);
}

ResponseModel parse_model(const std::string& m) {
  if (m == "det") return ResponseModel::det;
  if (m == "logit") return ResponseModel::logit;
  return ResponseModel::quad;
}

struct SolveArgs {
  std::string instance;
  std::string model = "quad";
  std::string method = "bnb";
  double beta = 1.0;
  std::optional<double> gap;
  double time_limit = 3600.0;
  std::uint64_t seed = 0;
  int threads = 1;
  int r_max = 3;
  int gamma_s = 1;
  int gamma_w = 1;
  double sigma = 0.05;
  std::string neighbor_mode = "qp";
  std::string start;
  std::string out;
  std::string dump_cell;
  long max_patterns = 1'000'000;
};

int run_solve(const SolveArgs& a) {
  Instance inst = load(a.instance);
  const ResponseModel model = parse_model(a.model);
  if (a.beta <= 0.0 && model != ResponseModel::det) throw UsageError("--beta must be > 0");

  SolveOptions so;
  so.gap = a.gap.value_or(model == ResponseModel::det ? 1e-6 : 3e-2);
  so.time_limit_s = a.time_limit;
  so.trace_level = trace_level();

  // The logit model is optimised through its quadratic surrogate at beta e / 4.
  const double qbeta = model == ResponseModel::logit ? a.beta * std::exp(1.0) / 4.0 : a.beta;

  SolveReport rep;
  if (model == ResponseModel::det) {
    if (a.method == "bnb") rep = solve_det(inst, so);
    else if (a.method == "cell-enum") rep = enumerate_det(inst, a.max_patterns);
    else throw UsageError("--method qspc needs --model quad or logit");
  } else if (a.method == "bnb") {
    rep = solve_quad(inst, qbeta, so);
  } else if (a.method == "cell-enum") {
    rep = enumerate_quad(inst, qbeta, a.max_patterns);
  } else {
    QspcOptions qo;
    qo.r_max = a.r_max;
    qo.gamma_S = std::min(a.gamma_s, inst.S);
    qo.gamma_W = std::min(a.gamma_w, inst.W);
    qo.sigma = a.sigma;
    qo.rng_seed = a.seed;
    qo.threads = a.threads;
    qo.neighbor_mode =
        a.neighbor_mode == "miqp" ? NeighborMode::restricted_miqp : NeighborMode::per_pattern_qp;
    qo.miqp.time_limit_s = a.time_limit;
    qo.miqp.trace_level = so.trace_level;
    std::optional<PriceVector> start;
    if (!a.start.empty()) start = load_prices(a.start, inst);
    rep = qspc(inst, qbeta, start, qo);
  }
  if (model == ResponseModel::logit && rep.has_incumbent) {
    rep.response = logit_response(inst, rep.x, a.beta);
    rep.objective = logit_profit(inst, rep.x, a.beta);
    rep.bound = std::numeric_limits<double>::infinity();
    rep.gap = std::numeric_limits<double>::infinity();
  }

  ReportContext ctx{model, a.method, a.beta, a.seed};
  emit(a.out, report_string(inst, rep, ctx));
  if (!a.dump_cell.empty() && rep.has_incumbent) {
    CellSystem sys = model == ResponseModel::det ? asymptotic_cell_system(inst, rep.pattern)
                                                 : cell_system(inst, rep.pattern, qbeta);
    emit(a.dump_cell, cell_system_json(sys).dump(2) + "\n");
  }
  for (const auto& p : check_incumbent(inst, rep, ctx)) std::cerr << "warning: " << p << "\n";
  if (!rep.has_incumbent && rep.status == SolveStatus::time_limit) return kExitNoIncumbent;
  return kExitOk;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Envy-free pricing solvers with quadratic, logit and deterministic responses"};
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  auto* cmd_validate = app.add_subcommand("validate", "Check an instance file");
  cmd_validate->add_option("instance", validate_path, "Instance JSON")->required();

  // generate
  GeneratorConfig gen;
  std::string gen_out;
  auto* cmd_gen = app.add_subcommand("generate", "Write a synthetic electricity-retail instance");
  cmd_gen->add_option("--segments,-S", gen.S, "Number of segments");
  cmd_gen->add_option("--contracts", gen.n_company_contracts, "Company contracts (1-4)");
  cmd_gen->add_option("--competitors", gen.n_competitors, "Competitor offers (1-6)");
  cmd_gen->add_option("--seed", gen.seed, "Random seed");
  cmd_gen->add_option("--load-shift", gen.load_shift, "Shiftable fraction of peak consumption");
  cmd_gen->add_flag("--offpeak-below-peak", gen.offpeak_below_peak,
                    "Add off-peak <= peak rows for peak/off-peak contracts");
  cmd_gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

  // solve
  SolveArgs sa;
  auto* cmd_solve = app.add_subcommand("solve", "Optimise prices and write a report");
  cmd_solve->add_option("instance", sa.instance, "Instance JSON")->required();
  cmd_solve->add_option("--model", sa.model)->check(CLI::IsMember({"det", "logit", "quad"}));
  cmd_solve->add_option("--method", sa.method)->check(CLI::IsMember({"bnb", "qspc", "cell-enum"}));
  cmd_solve->add_option("--beta", sa.beta, "Rationality parameter");
  cmd_solve->add_option("--gap", sa.gap, "Relative gap (default 1e-6 det, 3e-2 quad)");
  cmd_solve->add_option("--time-limit", sa.time_limit, "Seconds");
  cmd_solve->add_option("--seed", sa.seed, "Restart seed");
  cmd_solve->add_option("--threads", sa.threads)->check(CLI::PositiveNumber);
  cmd_solve->add_option("--r-max", sa.r_max, "Restarts without improvement");
  cmd_solve->add_option("--gamma-s", sa.gamma_s, "Rows freed per restart");
  cmd_solve->add_option("--gamma-w", sa.gamma_w, "Columns freed per restart");
  cmd_solve->add_option("--sigma", sa.sigma, "Entry freeing probability");
  cmd_solve->add_option("--neighbors", sa.neighbor_mode)->check(CLI::IsMember({"qp", "miqp"}));
  cmd_solve->add_option("--start", sa.start, "Start prices (matrix or report JSON)");
  cmd_solve->add_option("--max-patterns", sa.max_patterns, "Enumeration limit");
  cmd_solve->add_option("--dump-cell", sa.dump_cell, "Write the incumbent cell rows");
  cmd_solve->add_option("-o,--output", sa.out, "Report file (default stdout)");

  // sweep-profit
  std::string sp_instance, sp_base, sp_out, sp_betas = "0.2,1", sp_models = "det,logit,quad";
  SweepAxis axis;
  int sp_points = 201;
  bool axis_lo_set = false, axis_hi_set = false;
  auto* cmd_sp = app.add_subcommand("sweep-profit", "Profit along one price coordinate (CSV)");
  cmd_sp->add_option("instance", sp_instance)->required();
  cmd_sp->add_option("--contract", axis.contract, "0-based contract");
  cmd_sp->add_option("--attribute", axis.attribute, "0-based attribute");
  auto* o_lo = cmd_sp->add_option("--lo", axis.lo);
  auto* o_hi = cmd_sp->add_option("--hi", axis.hi);
  cmd_sp->add_option("--points", sp_points);
  cmd_sp->add_option("--betas", sp_betas, "Comma-separated");
  cmd_sp->add_option("--models", sp_models, "Subset of det,logit,quad");
  cmd_sp->add_option("--base", sp_base, "Prices of the fixed coordinates (default midpoint)");
  cmd_sp->add_option("-o,--output", sp_out);

  // sweep-beta
  std::string sb_instance, sb_det, sb_out, sb_betas = "0.05,0.1,0.2,0.5,1,2,5", sb_method = "qspc";
  std::uint64_t sb_seed = 0;
  auto* cmd_sb = app.add_subcommand("sweep-beta", "Optimum and fixed-price curves over beta (CSV)");
  cmd_sb->add_option("instance", sb_instance)->required();
  cmd_sb->add_option("--betas", sb_betas, "Comma-separated");
  cmd_sb->add_option("--det-prices", sb_det, "Deterministic prices (default: solve_det)");
  cmd_sb->add_option("--method", sb_method)->check(CLI::IsMember({"qspc", "bnb"}));
  cmd_sb->add_option("--seed", sb_seed);
  cmd_sb->add_option("-o,--output", sb_out);

  // compare-logit
  std::string cl_v;
  double cl_beta = 1.0;
  int cl_draws = 0;
  std::uint64_t cl_seed = 0;
  auto* cmd_cl = app.add_subcommand("compare-logit", "Logit against quadratic at beta e/4");
  cmd_cl->add_option("--V", cl_v, "Comma-separated disutilities");
  cmd_cl->add_option("--beta", cl_beta);
  cmd_cl->add_option("--draws", cl_draws, "Random draws instead of --V");
  cmd_cl->add_option("--seed", cl_seed);

  // oracle
  std::string or_instance, or_model = "quad";
  double or_beta = 1.0;
  long or_max = 1'000'000;
  auto* cmd_or = app.add_subcommand("oracle", "Exhaustive cell enumeration optimum");
  cmd_or->add_option("instance", or_instance)->required();
  cmd_or->add_option("--model", or_model)->check(CLI::IsMember({"det", "quad"}));
  cmd_or->add_option("--beta", or_beta);
  cmd_or->add_option("--max-patterns", or_max);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  axis_lo_set = o_lo->count() > 0;
  axis_hi_set = o_hi->count() > 0;

  try {
    if (*cmd_validate) {
      Instance inst = read_instance_file(validate_path);
      auto v = validate(inst);
      if (v.empty()) {
        std::cout << "ok\n";
        return kExitOk;
      }
      for (const auto& e : v) std::cout << e.message << "\n";
      return kExitInvalid;
    }
    if (*cmd_gen) {
      emit(gen_out, dump_instance(generate(gen)));
      return kExitOk;
    }
    if (*cmd_solve) return run_solve(sa);
    if (*cmd_sp) {
      Instance inst = load(sp_instance);
      PriceVector base = sp_base.empty() ? inst.X.midpoint() : load_prices(sp_base, inst);
      if (axis.contract < 0 || axis.contract >= inst.W || axis.attribute < 0 ||
          axis.attribute >= inst.H)
        throw UsageError("axis outside the price matrix");
      if (!axis_lo_set) axis.lo = inst.X.lower(axis.contract, axis.attribute);
      if (!axis_hi_set) axis.hi = inst.X.upper(axis.contract, axis.attribute);
      std::vector<ProfitModel> models;
      std::stringstream ss(sp_models);
      for (std::string tok; std::getline(ss, tok, ',');) {
        if (tok == "det") models.push_back(ProfitModel::det);
        else if (tok == "logit") models.push_back(ProfitModel::logit);
        else if (tok == "quad") models.push_back(ProfitModel::quad);
        else throw UsageError("unknown model '" + tok + "'");
      }
      std::ostringstream os;
      write_csv(os, profit_sweep(inst, base, axis, sp_points, parse_list(sp_betas), models));
      emit(sp_out, os.str());
      return kExitOk;
    }
    if (*cmd_sb) {
      Instance inst = load(sb_instance);
      PriceVector det;
      if (sb_det.empty()) {
        SolveOptions so;
        so.gap = 1e-6;
        so.trace_level = trace_level();
        SolveReport r = solve_det(inst, so);
        if (!r.has_incumbent) return kExitNoIncumbent;
        det = r.x;
      } else {
        det = load_prices(sb_det, inst);
      }
      BetaSweepOptions bo;
      bo.method = sb_method == "bnb" ? SweepMethod::bnb : SweepMethod::qspc;
      bo.qspc.rng_seed = sb_seed;
      bo.qspc.gamma_S = std::min(bo.qspc.gamma_S, inst.S);
      bo.qspc.gamma_W = std::min(bo.qspc.gamma_W, inst.W);
      std::ostringstream os;
      write_csv(os, to_rows(beta_sweep(inst, parse_list(sb_betas), det, bo)));
      emit(sb_out, os.str());
      return kExitOk;
    }
    if (*cmd_cl) {
      nlohmann::json out;
      if (cl_draws > 0) {
        std::mt19937_64 rng(cl_seed);
        std::uniform_real_distribution<double> uv(-5.0, 5.0), lb(-2.0, 2.0);
        std::uniform_int_distribution<int> uw(1, 8);
        long violations = 0;
        for (int d = 0; d < cl_draws; ++d) {
          Eigen::VectorXd V(uw(rng) + 1);
          V(0) = 0.0;
          for (int i = 1; i < V.size(); ++i) V(i) = uv(rng);
          violations += check_metric_estimates(V, std::pow(10.0, lb(rng))).violations;
        }
        out = {{"draws", cl_draws}, {"violations", violations}};
      } else {
        auto vals = parse_list(cl_v);
        if (vals.empty()) throw UsageError("--V or --draws is required");
        Eigen::VectorXd V = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
        auto rep = check_metric_estimates(V, cl_beta);
        out = {{"beta", rep.beta},
               {"beta_prime", rep.beta_prime},
               {"quad", std::vector<double>(rep.quad.data(), rep.quad.data() + rep.quad.size())},
               {"logit",
                std::vector<double>(rep.logit.data(), rep.logit.data() + rep.logit.size())},
               {"l1_distance", rep.l1_distance},
               {"violations", rep.violations}};
      }
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }
    if (*cmd_or) {
      Instance inst = load(or_instance);
      SolveReport r = or_model == "det" ? enumerate_det(inst, or_max)
                                        : enumerate_quad(inst, or_beta, or_max);
      nlohmann::json out = {{"model", or_model},
                            {"patterns", r.nodes},
                            {"has_incumbent", r.has_incumbent}};
      if (or_model == "quad") out["beta"] = or_beta;
      if (r.has_incumbent) {
        out["value"] = r.objective;
        out["pattern"] = r.pattern.to_string();
        out["prices"] = price_to_json(r.x);
      }
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const InstanceFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
