#pragma once

#include <string>

#include <json.hpp>

#include "clab/gen_number.hpp"

namespace clab {

// One scenario outcome: echo of the request, parameter provenance, the
// verdict payload, and a pass flag. Wall time is kept out of the JSON unless
// explicitly requested, so fixed-seed reruns are byte-identical.
struct Report {
  std::string kind;
  nlohmann::json inputs;
  nlohmann::json params;
  nlohmann::json result;
  bool ok = true;
  double wall_ms = 0.0;

  nlohmann::json to_json(bool include_timing) const {
    nlohmann::json j;
    j["kind"] = kind;
    j["inputs"] = inputs;
    j["params"] = params;
    j["result"] = result;
    j["ok"] = ok;
    if (include_timing) j["wall_ms"] = wall_ms;
    return j;
  }
};

nlohmann::json context_params_json(const Context& ctx, std::uint64_t seed,
                                   const std::vector<std::string>& overridden);

// Dispatches one scenario. `inputs` fields are scenario-specific; values that
// look like file paths are loaded, everything else is treated as inline
// expression text.
Report run_scenario(const Context& ctx, const std::string& kind,
                    const nlohmann::json& inputs, std::uint64_t seed);

}  // namespace clab
