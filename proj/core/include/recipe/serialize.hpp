#pragma once

#include <string>

#include "recipe/automata.hpp"
#include "recipe/symbolic.hpp"

namespace recipe {

/// One trace step as a JSON object:
///   {"state": {agent: {var: value}}, "message": {"ch", "d", "sender", "pi"}}
/// The predicate is rendered as assertion text.
std::string step_json(const SystemDef& sys, const SystemState& state, const Message& msg);

/// Verdict object: {"result", "witness": {"stem": [...], "loop": [...]}, "notes": [...]}.
std::string verdict_json(const SystemDef& sys, const Verdict& v);

/// Whole trace, one step object per line.
std::string trace_jsonl(const SystemDef& sys, const std::vector<TraceStep>& steps);

std::string report_json(const SystemDef& sys, const FullAbstractionReport& rep);

}  // namespace recipe
