#include "coiso/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "coiso/errors.hpp"

namespace coiso {

namespace {

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

const Json& require(const Json& obj, const char* key, const char* context) {
  if (!obj.is_object() || !obj.contains(key))
    throw InputError(std::string(context) + ": missing key '" + key + "'");
  return obj.at(key);
}

std::string require_string(const Json& value, const std::string& context) {
  if (!value.is_string())
    throw InputError(context + ": expected a string");
  return value.get<std::string>();
}

std::vector<std::string> string_list(const Json& value, const std::string& context) {
  if (!value.is_array())
    throw InputError(context + ": expected an array of names");
  std::vector<std::string> out;
  for (const auto& v : value)
    out.push_back(require_string(v, context));
  return out;
}

ScalarFn poly_from_json(const Json& value, const VarSetPtr& vars, const std::string& context) {
  if (value.is_number_integer())
    return ScalarFn(vars, Rational(value.get<long>()));
  const std::string text = require_string(value, context);
  try {
    return parse(text, vars);
  } catch (const ParseError& e) {
    throw InputError(context + ": " + e.what());
  }
}

std::size_t var_index(const VarSetPtr& vars, const std::string& name, const std::string& context) {
  const auto idx = vars->find(name);
  if (!idx)
    throw InputError(context + ": unknown variable '" + name + "'");
  return *idx;
}

RationalMatrix matrix_from_json(const Json& value, const std::string& context) {
  if (!value.is_array())
    throw InputError(context + ": expected a matrix");
  RationalMatrix m;
  for (const auto& row : value) {
    if (!row.is_array())
      throw InputError(context + ": expected a matrix row");
    std::vector<Rational> r;
    for (const auto& x : row)
      r.push_back(rational_from_json(x));
    m.push_back(std::move(r));
  }
  return m;
}

Json matrix_to_json(const RationalMatrix& m) {
  Json out = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const auto& x : row)
      r.push_back(rational_to_string(x));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> names(const ChartSpec& chart, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx)
    out.push_back((*chart.vars())[i].name);
  return out;
}

} // namespace

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Drop the library prefix "[json.exception.parse_error.101] ".
    if (const auto pos = what.find("] "); pos != std::string::npos)
      what = what.substr(pos + 2);
    throw ParseError("invalid JSON: " + what, line, column);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_json(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out)
    throw InputError("cannot write '" + path.string() + "'");
  out << value.dump(2) << '\n';
}

Rational rational_from_json(const Json& value) {
  if (value.is_number_integer())
    return Rational(value.get<long>());
  if (value.is_string())
    return parse_rational(value.get<std::string>());
  throw InputError("expected a rational as an integer or an \"a/b\" string");
}

Json multivector_to_json(const Multivector& m) {
  Json out = Json::array();
  for (const auto& [frame, c] : m.terms()) {
    Json names = Json::array();
    for (auto d : frame)
      names.push_back((*m.vars())[d].name);
    out.push_back(Json{{"coeff", c.to_string()}, {"frame", std::move(names)}});
  }
  return out;
}

Multivector multivector_from_json(const Json& value, const VarSetPtr& vars, unsigned degree) {
  if (!value.is_array())
    throw InputError("multivector: expected an array of {coeff, frame} terms");
  Multivector m(vars, degree);
  for (const auto& term : value) {
    const ScalarFn c = poly_from_json(require(term, "coeff", "multivector term"), vars, "multivector coeff");
    Frame frame;
    for (const auto& name : string_list(require(term, "frame", "multivector term"), "multivector frame")) {
      const auto idx = var_index(vars, name, "multivector frame");
      if ((*vars)[idx].kind == VarKind::time)
        throw InputError("multivector frame: the time variable has no direction");
      frame.push_back(static_cast<std::uint32_t>(idx));
    }
    if (frame.size() != degree)
      throw InputError("multivector frame has " + std::to_string(frame.size()) + " directions, expected " +
                       std::to_string(degree));
    for (std::size_t i = 1; i < frame.size(); ++i)
      if (frame[i - 1] >= frame[i])
        throw InputError("multivector frame must be strictly ordered in chart order");
    m += Multivector::term(c, frame);
  }
  return m;
}

Json oneform_to_json(const OneForm& beta) {
  Json out = Json::object();
  for (const auto& [var, c] : beta.components)
    if (!c.is_zero())
      out[(*beta.vars)[var].name] = c.to_string();
  return out;
}

OneForm oneform_from_json(const Json& value, const VarSetPtr& vars) {
  if (!value.is_object())
    throw InputError("one-form: expected an object {variable: polynomial}");
  OneForm beta{vars, {}};
  for (const auto& [name, coeff] : value.items()) {
    const auto idx = var_index(vars, name, "one-form");
    if ((*vars)[idx].kind == VarKind::time)
      throw InputError("one-form: dt is not a chart direction");
    beta.components.insert_or_assign(idx, poly_from_json(coeff, vars, "one-form component " + name));
  }
  return beta;
}

Json section_to_json(const ChartSpec& chart, const Section& s) {
  Json out = Json::object();
  for (std::size_t j = 0; j < chart.fibre_dim(); ++j)
    out[(*chart.vars())[chart.fibre()[j]].name] = s.components[j].to_string();
  return out;
}

Section section_from_json(const Json& value, const ChartSpec& chart) {
  if (!value.is_object())
    throw InputError("section: expected an object {fibre variable: polynomial}");
  Section s = zero_section(chart);
  for (const auto& [name, poly] : value.items()) {
    const auto idx = var_index(chart.vars(), name, "section");
    const auto it = std::find(chart.fibre().begin(), chart.fibre().end(), idx);
    if (it == chart.fibre().end())
      throw InputError("section: '" + name + "' is not a fibre variable");
    s.components[static_cast<std::size_t>(it - chart.fibre().begin())] =
        poly_from_json(poly, chart.vars(), "section component " + name);
  }
  validate_section(chart, s);
  return s;
}

Json chart_to_json(const ChartSpec& chart) {
  Json out{{"name", chart.name()}, {"base", names(chart, chart.base())}, {"fibre", names(chart, chart.fibre())}};
  out["pi"] = multivector_to_json(chart.pi());
  Json box = Json::array();
  for (const auto& iv : chart.box())
    box.push_back(Json::array({iv.lo, iv.hi}));
  out["box"] = std::move(box);
  if (const auto& a = chart.adapted()) {
    out["adapted"] = Json{{"leaf_vars", names(chart, a->leaf_vars)},
                          {"kernel_vars", names(chart, a->kernel_vars)},
                          {"omega_C", matrix_to_json(a->omega_C)}};
  }
  return out;
}

ChartSpec chart_from_json(const Json& value) {
  if (!value.is_object())
    throw InputError("chart: expected an object");
  const std::string name = value.contains("name") ? require_string(value.at("name"), "chart name") : "chart";
  const auto base = string_list(require(value, "base", "chart"), "chart base");
  const auto fibre = string_list(require(value, "fibre", "chart"), "chart fibre");
  const VarSetPtr vars = chart_vars(base, fibre);

  Multivector pi(vars, 2);
  if (value.contains("pi") && value.contains("omega"))
    throw InputError("chart: give either 'pi' or 'omega', not both");
  if (value.contains("pi")) {
    pi = multivector_from_json(value.at("pi"), vars, 2);
  } else if (value.contains("omega")) {
    // Constant 2-form sum_{i<j} matrix[i][j] dv_i^dv_j over the listed directions.
    const Json& omega = value.at("omega");
    std::vector<std::size_t> dirs;
    for (const auto& n : string_list(require(omega, "directions", "chart omega"), "chart omega directions"))
      dirs.push_back(var_index(vars, n, "chart omega"));
    pi = invert_constant_symplectic(vars, dirs, matrix_from_json(require(omega, "matrix", "chart omega"), "omega"));
  } else {
    throw InputError("chart: missing key 'pi' (or 'omega')");
  }

  std::vector<Interval> box(base.size());
  if (value.contains("box")) {
    const Json& b = value.at("box");
    if (!b.is_array() || b.size() != base.size())
      throw InputError("chart box: expected one [lo, hi] pair per base variable");
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (!b[i].is_array() || b[i].size() != 2 || !b[i][0].is_number() || !b[i][1].is_number())
        throw InputError("chart box: expected [lo, hi] numbers");
      box[i] = Interval{b[i][0].get<double>(), b[i][1].get<double>()};
    }
  }

  std::optional<AdaptedMeta> adapted;
  if (value.contains("adapted")) {
    const Json& a = value.at("adapted");
    AdaptedMeta meta;
    for (const auto& n : string_list(require(a, "leaf_vars", "adapted"), "adapted leaf_vars"))
      meta.leaf_vars.push_back(var_index(vars, n, "adapted leaf_vars"));
    for (const auto& n : string_list(require(a, "kernel_vars", "adapted"), "adapted kernel_vars"))
      meta.kernel_vars.push_back(var_index(vars, n, "adapted kernel_vars"));
    meta.omega_C = matrix_from_json(require(a, "omega_C", "adapted"), "adapted omega_C");
    adapted = std::move(meta);
  }
  return ChartSpec(name, vars, std::move(pi), std::move(box), std::move(adapted));
}

ScalarFn family_from_json(const Json& value, const ChartSpec& chart) {
  const ScalarFn f = poly_from_json(require(value, "f", "family"), chart.vars(), "family f");
  if (f.depends_on_kind(VarKind::fibre))
    throw InputError("family f must depend on base variables and t only");
  return f;
}

Json flow_config_to_json(const FlowConfig& cfg) {
  return Json{{"dt", cfg.dt},
              {"t1", cfg.t1},
              {"integrator", "rk4"},
              {"oversample", cfg.oversample},
              {"interpolation_k", cfg.interpolation_k},
              {"grid", cfg.grid},
              {"tol_graph", cfg.tol_graph}};
}

FlowConfig flow_config_from_json(const Json& value) {
  if (!value.is_object())
    throw InputError("flow config: expected an object");
  FlowConfig cfg;
  try {
    if (value.contains("dt"))
      cfg.dt = value.at("dt").get<double>();
    if (value.contains("t1"))
      cfg.t1 = value.at("t1").get<double>();
    if (value.contains("integrator") && value.at("integrator").get<std::string>() != "rk4")
      throw InputError("flow config: only the rk4 integrator is available");
    if (value.contains("oversample"))
      cfg.oversample = value.at("oversample").get<unsigned>();
    if (value.contains("interpolation_k"))
      cfg.interpolation_k = value.at("interpolation_k").get<unsigned>();
    if (value.contains("grid"))
      cfg.grid = value.at("grid").get<std::vector<std::size_t>>();
    if (value.contains("tol_graph"))
      cfg.tol_graph = value.at("tol_graph").get<double>();
  } catch (const nlohmann::json::type_error& e) {
    throw InputError(std::string("flow config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json mc_report_to_json(const MCReport& report) {
  return Json{{"residual", multivector_to_json(report.residual)},
              {"order_terminated", report.order_terminated},
              {"order_bound", report.order_bound},
              {"terminated", report.terminated},
              {"is_zero", report.is_zero},
              {"oracle_residual", multivector_to_json(report.oracle_residual)},
              {"oracle_agrees", report.oracle_agrees}};
}

} // namespace coiso
