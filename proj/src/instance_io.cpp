#include "tariff/instance_io.hpp"

#include <fstream>
#include <sstream>

namespace tariff {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InstanceFormatError("field '" + path + "': " + what);
}

const json& member(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) fail(key, "missing");
  return *it;
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double get_real(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

const json& get_array(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array()) fail(path, "expected an array");
  if (j.size() != n)
    fail(path, "expected " + std::to_string(n) + " entries, found " + std::to_string(j.size()));
  return j;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& path, int rows, int cols) {
  get_array(j, path, rows);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::string p = path + "[" + std::to_string(r) + "]";
    get_array(j[r], p, cols);
    for (int c = 0; c < cols; ++c) m(r, c) = get_real(j[r][c], p + "[" + std::to_string(c) + "]");
  }
  return m;
}

json matrix_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw InstanceFormatError("instance must be a JSON object");
  Instance inst;
  inst.S = get_int(member(j, "S"), "S");
  inst.W = get_int(member(j, "W"), "W");
  inst.H = get_int(member(j, "H"), "H");
  if (inst.S < 1) fail("S", "must be >= 1");
  if (inst.W < 1) fail("W", "must be >= 1");
  if (inst.H < 1) fail("H", "must be >= 1");

  const json& E = get_array(member(j, "E"), "E", inst.S);
  for (int s = 0; s < inst.S; ++s)
    inst.E.emplace_back(get_matrix(E[s], "E[" + std::to_string(s) + "]", inst.W, inst.H));
  inst.R = get_matrix(member(j, "R"), "R", inst.S, inst.W);
  inst.C = get_matrix(member(j, "C"), "C", inst.S, inst.W);
  const json& rho = get_array(member(j, "rho"), "rho", inst.S);
  inst.rho.resize(inst.S);
  for (int s = 0; s < inst.S; ++s) inst.rho(s) = get_real(rho[s], "rho[" + std::to_string(s) + "]");
  inst.X.lower = get_matrix(member(j, "price_lower"), "price_lower", inst.W, inst.H);
  inst.X.upper = get_matrix(member(j, "price_upper"), "price_upper", inst.W, inst.H);

  if (auto it = j.find("extra_constraints"); it != j.end()) {
    if (!it->is_array()) fail("extra_constraints", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string p = "extra_constraints[" + std::to_string(k) + "]";
      const json& row = (*it)[k];
      if (!row.is_object()) fail(p, "expected an object");
      LinearConstraint c;
      const json& g = get_array(member(row, "g"), p + ".g", inst.price_dim());
      for (std::size_t i = 0; i < g.size(); ++i)
        c.g.push_back(get_real(g[i], p + ".g[" + std::to_string(i) + "]"));
      auto h = row.find("h");
      if (h == row.end()) fail(p + ".h", "missing");
      c.h = get_real(*h, p + ".h");
      inst.X.extra.push_back(std::move(c));
    }
  }
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j;
  j["S"] = inst.S;
  j["W"] = inst.W;
  j["H"] = inst.H;
  json E = json::array();
  for (const auto& e : inst.E) E.push_back(matrix_json(e));
  j["E"] = std::move(E);
  j["R"] = matrix_json(inst.R);
  j["C"] = matrix_json(inst.C);
  j["rho"] = std::vector<double>(inst.rho.data(), inst.rho.data() + inst.rho.size());
  j["price_lower"] = matrix_json(inst.X.lower);
  j["price_upper"] = matrix_json(inst.X.upper);
  json extra = json::array();
  for (const auto& c : inst.X.extra) extra.push_back({{"g", c.g}, {"h", c.h}});
  j["extra_constraints"] = std::move(extra);
  return j;
}

Instance parse_instance(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InstanceFormatError("JSON syntax error at line " + std::to_string(line) +
                              ", column " + std::to_string(col) + ": " + e.what());
  }
  return instance_from_json(j);
}

std::string dump_instance(const Instance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceFormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

void write_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << dump_instance(inst);
}

json price_to_json(const PriceVector& x) { return matrix_json(x.x); }

PriceVector price_from_json(const json& j, int W, int H) {
  return PriceVector(PriceMatrix(get_matrix(j, "prices", W, H)));
}

json cell_system_json(const CellSystem& sys) {
  json rows = json::array();
  for (const auto& r : sys.rows) {
    const char* side = r.side == RowSide::active     ? "active"
                       : r.side == RowSide::inactive ? "inactive"
                                                     : "polytope";
    rows.push_back({{"segment", r.segment},
                    {"option", r.option},
                    {"side", side},
                    {"strict", r.strict},
                    {"equality", r.equality},
                    {"grad", std::vector<double>(r.lhs.grad.data(),
                                                 r.lhs.grad.data() + r.lhs.grad.size())},
                    {"constant", r.lhs.constant}});
  }
  return {{"pattern", sys.pattern.to_string()},
          {"beta", sys.beta.is_infinite() ? json("inf") : json(sys.beta.value)},
          {"rows", std::move(rows)}};
}

}  // namespace tariff
