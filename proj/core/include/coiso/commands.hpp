#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "coiso/chart.hpp"
#include "coiso/flow.hpp"
#include "coiso/json_io.hpp"
#include "coiso/scenarios.hpp"

namespace coiso {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericAbort = 3;

// A JSON report plus the process exit code it maps to. Every report carries
// "verdict" in {pass, fail, flagged} and "wall_time_s"; everything else is
// deterministic.
struct CommandResult {
  Json report;
  int exit_code = kExitPass;
};

CommandResult cmd_validate(const ChartSpec& chart);
CommandResult cmd_mc(const ChartSpec& chart, const Section& s, unsigned max_order = 32);
CommandResult cmd_coiso(const ChartSpec& chart, const Section& s);

struct FlowRequest {
  FlowMode mode = FlowMode::both;
  std::optional<ScalarFn> family;
  std::optional<OneForm> oneform;
  Section initial;
  FlowConfig cfg;
  std::optional<Section> expected;
};

// Throws InputError for inconsistent requests (no generator, a non-closed or
// non-Poisson one-form, transversal mode without adapted metadata) and
// NumericAbort when a flow escapes.
CommandResult cmd_flow(const ChartSpec& chart, const FlowRequest& request);

CommandResult cmd_scenario(const std::string& name, std::uint64_t seed);
CommandResult cmd_scenario_all(std::uint64_t seed);

// One CSV row per check: scenario,check,verdict,value.
std::string summary_csv(const Json& report);

// Copy of a report without the wall-time fields, for reproducibility checks.
Json strip_timing(Json report);

} // namespace coiso
