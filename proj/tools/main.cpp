#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coiso/commands.hpp"
#include "coiso/errors.hpp"
#include "coiso/json_io.hpp"
#include "coiso/scenarios.hpp"

namespace {

using namespace coiso;

// A chart argument is a JSON file or the name of a built-in scenario.
ChartSpec load_chart(const std::string& arg) {
  if (std::filesystem::exists(arg))
    return chart_from_json(read_json_file(arg));
  for (const auto& name : scenario_names())
    if (name == arg)
      return make_scenario(name).chart;
  throw InputError("'" + arg + "' is neither a chart file nor a built-in scenario");
}

// A section argument is a JSON file or inline JSON text.
Section load_section(const std::string& arg, const ChartSpec& chart) {
  if (std::filesystem::exists(arg))
    return section_from_json(read_json_file(arg), chart);
  return section_from_json(parse_json(arg), chart);
}

Json load_inline_or_file(const std::string& arg) {
  if (std::filesystem::exists(arg))
    return read_json_file(arg);
  return parse_json(arg);
}

struct Output {
  std::string out;
  std::string csv;
};

int emit(CommandResult result, const Output& o, const std::vector<std::string>& argv) {
  result.report["argv"] = argv;
  if (o.out.empty()) {
    std::cout << result.report.dump(2) << '\n';
  } else {
    write_json_file(o.out, result.report);
    std::cerr << result.report.value("command", std::string("coiso")) << ": "
              << result.report.at("verdict").get<std::string>() << " (" << o.out << ")\n";
  }
  if (!o.csv.empty()) {
    std::ofstream csv(o.csv);
    if (!csv)
      throw InputError("cannot write '" + o.csv + "'");
    csv << summary_csv(result.report);
  }
  return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"coiso: coisotropic deformations on local charts"};
  app.require_subcommand(1);

  Output out;
  std::uint64_t seed = 1;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out.out, "Write the JSON report to this file");
    cmd->add_option("--csv", out.csv, "Write a summary table as CSV");
  };

  std::string chart_arg, section_arg;

  auto* validate = app.add_subcommand("validate", "Check [pi, pi] = 0, P(pi) = 0 and adapted metadata");
  validate->add_option("chart", chart_arg, "Chart JSON file or built-in scenario name")->required();
  add_common(validate);

  unsigned max_order = 32;
  auto* mc = app.add_subcommand("mc", "Maurer-Cartan series of a section against the geometric oracles");
  mc->add_option("chart", chart_arg, "Chart JSON file or built-in scenario name")->required();
  mc->add_option("section", section_arg, "Section JSON file or inline JSON")->required();
  mc->add_option("--max-order", max_order, "Series truncation order")->check(CLI::Range(1u, 1000u));
  add_common(mc);

  auto* coiso_cmd = app.add_subcommand("coiso", "Conormal coisotropy test of a section");
  coiso_cmd->add_option("chart", chart_arg, "Chart JSON file or built-in scenario name")->required();
  coiso_cmd->add_option("section", section_arg, "Section JSON file or inline JSON")->required();
  add_common(coiso_cmd);

  std::string family_arg, oneform_arg, mode = "both", config_arg, expected_arg;
  FlowConfig cfg;
  auto* flow = app.add_subcommand("flow", "Gauge / extended gauge flows of a section");
  flow->add_option("chart", chart_arg, "Chart JSON file or built-in scenario name")->required();
  flow->add_option("section", section_arg, "Initial section JSON file or inline JSON")->required();
  auto* fam = flow->add_option("--family", family_arg, "Family {\"f\": poly in base vars and t} (file or inline)");
  auto* one = flow->add_option("--oneform", oneform_arg, "Closed one-form {var: poly} (file or inline)");
  fam->excludes(one);
  flow->add_option("--mode", mode, "pde, graph, both or transversal")
      ->check(CLI::IsMember({"pde", "graph", "both", "transversal"}));
  flow->add_option("--config", config_arg, "Flow config JSON (file or inline); flags below override it");
  auto* dt = flow->add_option("--dt", cfg.dt, "RK4 step");
  auto* t1 = flow->add_option("--t1", cfg.t1, "End time");
  auto* over = flow->add_option("--oversample", cfg.oversample, "Cloud points per grid cell and axis");
  auto* knn = flow->add_option("--interpolation-k", cfg.interpolation_k, "Neighbours per reconstruction fit");
  auto* grid = flow->add_option("--grid", cfg.grid, "Nodes per base axis");
  auto* tol = flow->add_option("--tol", cfg.tol_graph, "Comparison tolerance");
  flow->add_option("--expected", expected_arg, "Closed-form endpoint section to compare against");
  add_common(flow);

  std::string scenario_name;
  bool all = false;
  auto* scenario = app.add_subcommand("scenario", "Run a built-in scenario");
  scenario->add_option("name", scenario_name, "lagrangian_n1, lagrangian_n2, torus or hypersurface");
  scenario->add_flag("--all", all, "Run every built-in scenario");
  scenario->add_option("--seed", seed, "Seed for the random checks");
  add_common(scenario);

  const std::vector<std::string> args(argv, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (validate->parsed())
      return emit(cmd_validate(load_chart(chart_arg)), out, args);

    if (mc->parsed()) {
      const ChartSpec chart = load_chart(chart_arg);
      return emit(cmd_mc(chart, load_section(section_arg, chart), max_order), out, args);
    }

    if (coiso_cmd->parsed()) {
      const ChartSpec chart = load_chart(chart_arg);
      return emit(cmd_coiso(chart, load_section(section_arg, chart)), out, args);
    }

    if (flow->parsed()) {
      const ChartSpec chart = load_chart(chart_arg);
      FlowRequest req;
      req.mode = flow_mode_from_string(mode);
      req.initial = load_section(section_arg, chart);
      if (!family_arg.empty())
        req.family = family_from_json(load_inline_or_file(family_arg), chart);
      else if (!oneform_arg.empty())
        req.oneform = oneform_from_json(load_inline_or_file(oneform_arg), chart.vars());
      else
        throw InputError("flow needs --family or --oneform");
      FlowConfig merged = config_arg.empty() ? FlowConfig{} : flow_config_from_json(load_inline_or_file(config_arg));
      if (*dt)
        merged.dt = cfg.dt;
      if (*t1)
        merged.t1 = cfg.t1;
      if (*over)
        merged.oversample = cfg.oversample;
      if (*knn)
        merged.interpolation_k = cfg.interpolation_k;
      if (*grid)
        merged.grid = cfg.grid;
      if (*tol)
        merged.tol_graph = cfg.tol_graph;
      req.cfg = merged;
      if (!expected_arg.empty())
        req.expected = load_section(expected_arg, chart);
      return emit(cmd_flow(chart, req), out, args);
    }

    if (scenario->parsed()) {
      if (all == !scenario_name.empty())
        throw InputError("scenario needs a name or --all");
      return emit(all ? cmd_scenario_all(seed) : cmd_scenario(scenario_name, seed), out, args);
    }
  } catch (const NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << '\n';
    return kExitNumericAbort;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
