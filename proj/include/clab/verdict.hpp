#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace clab {

enum class Status { Proven, Refuted, Undetermined };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Proven: return "Proven";
    case Status::Refuted: return "Refuted";
    case Status::Undetermined: return "Undetermined";
  }
  return "?";
}

struct Witness {
  double eps = 0.0;
  double value = 0.0;
};

// Three-valued outcome with its evidence. "Undetermined + consistent" means
// the tested grid is compatible with the claim but nothing was proved.
struct Verdict {
  Status status = Status::Undetermined;
  bool consistent = false;
  std::string rule;                 // short machine tag, e.g. "symbolic:v=+inf"
  std::vector<std::string> trace;   // human-readable derivation/evidence
  std::vector<Witness> witnesses;
  std::optional<double> slope;
  std::optional<double> residual;
  std::optional<int> exponent;      // N or m when one was selected

  bool proven() const { return status == Status::Proven; }
  bool refuted() const { return status == Status::Refuted; }
  bool not_refuted() const { return status != Status::Refuted; }
  bool acceptable() const {
    return proven() || (status == Status::Undetermined && consistent);
  }

  static Verdict make_proven(std::string rule_tag, std::string note = {}) {
    Verdict v;
    v.status = Status::Proven;
    v.consistent = true;
    v.rule = std::move(rule_tag);
    if (!note.empty()) v.trace.push_back(std::move(note));
    return v;
  }
  static Verdict make_refuted(std::string rule_tag, std::string note = {}) {
    Verdict v;
    v.status = Status::Refuted;
    v.rule = std::move(rule_tag);
    if (!note.empty()) v.trace.push_back(std::move(note));
    return v;
  }
  static Verdict make_undetermined(std::string rule_tag, bool data_consistent,
                                   std::string note = {}) {
    Verdict v;
    v.status = Status::Undetermined;
    v.consistent = data_consistent;
    v.rule = std::move(rule_tag);
    if (!note.empty()) v.trace.push_back(std::move(note));
    return v;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["status"] = status_name(status);
    j["consistent"] = consistent;
    j["rule"] = rule;
    if (slope) j["slope"] = *slope;
    if (residual) j["residual"] = *residual;
    if (exponent) j["exponent"] = *exponent;
    j["witnesses"] = nlohmann::json::array();
    for (const auto& w : witnesses)
      j["witnesses"].push_back({{"eps", w.eps}, {"value", w.value}});
    j["rule_trace"] = trace;
    return j;
  }
};

}  // namespace clab
