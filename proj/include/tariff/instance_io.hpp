#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tariff/complex.hpp"
#include "tariff/model.hpp"

namespace tariff {

/// Malformed instance text: syntax errors carry line/column, schema errors the
/// offending field path.
class InstanceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Instance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const Instance& inst);

Instance parse_instance(std::string_view text);
std::string dump_instance(const Instance& inst);

Instance read_instance_file(const std::string& path);
void write_instance_file(const Instance& inst, const std::string& path);

nlohmann::json price_to_json(const PriceVector& x);
PriceVector price_from_json(const nlohmann::json& j, int W, int H);

/// Row list of a cell system for debugging.
nlohmann::json cell_system_json(const CellSystem& sys);

}  // namespace tariff
