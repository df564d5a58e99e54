#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "coiso/chart.hpp"
#include "coiso/flow.hpp"
#include "coiso/linfty.hpp"
#include "coiso/multivector.hpp"

namespace coiso {

using Json = nlohmann::ordered_json;

// Parses JSON text; syntax errors become ParseError with line and column.
Json parse_json(const std::string& text);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

// Rationals are written as strings "a" or "a/b"; integers are accepted on input.
Rational rational_from_json(const Json& value);

// [{"coeff": "x1", "frame": ["x1", "p1"]}, ...]
Json multivector_to_json(const Multivector& m);
Multivector multivector_from_json(const Json& value, const VarSetPtr& vars, unsigned degree);

// {"x1": "x2", ...}: coefficient of d(variable).
Json oneform_to_json(const OneForm& beta);
OneForm oneform_from_json(const Json& value, const VarSetPtr& vars);

// {"p1": "x2", ...}; fibre variables not listed are zero.
Json section_to_json(const ChartSpec& chart, const Section& s);
Section section_from_json(const Json& value, const ChartSpec& chart);

// {"name", "base", "fibre", "pi" | "omega", "box"?, "adapted"?}
Json chart_to_json(const ChartSpec& chart);
ChartSpec chart_from_json(const Json& value);

// {"f": "x1*x2*t"}
ScalarFn family_from_json(const Json& value, const ChartSpec& chart);

Json flow_config_to_json(const FlowConfig& cfg);
// Missing keys keep their defaults.
FlowConfig flow_config_from_json(const Json& value);

Json mc_report_to_json(const MCReport& report);

} // namespace coiso
