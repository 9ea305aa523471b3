#include "recipe/serialize.hpp"

#include <json.hpp>

namespace recipe {

namespace {

using json = nlohmann::ordered_json;

json state_json(const SystemDef& sys, const SystemState& s) {
  json out = json::object();
  int off = 0;
  for (const auto& ag : sys.agents) {
    json vars = json::object();
    for (size_t v = 0; v < ag.vars.size(); ++v)
      vars[ag.vars[v].name] = sys.syms.name(s.values[off + v]);
    out[ag.name] = std::move(vars);
    off += static_cast<int>(ag.vars.size());
  }
  return out;
}

json message_json(const SystemDef& sys, const Message& m) {
  json d = json::object();
  for (size_t i = 0; i < sys.data_vars.size(); ++i)
    d[sys.data_vars[i].name] = sys.syms.name(m.data[i]);
  json out = json::object();
  out["ch"] = sys.syms.name(m.channel);
  out["d"] = std::move(d);
  out["sender"] = sys.syms.name(m.sender);
  out["pi"] = m.pred.formula ? to_string(sys, m.pred.formula) : "true";
  return out;
}

json step_obj(const SystemDef& sys, const SystemState& s, const Message& m) {
  json out = json::object();
  out["state"] = state_json(sys, s);
  out["message"] = message_json(sys, m);
  return out;
}

}  // namespace

std::string step_json(const SystemDef& sys, const SystemState& state, const Message& msg) {
  return step_obj(sys, state, msg).dump();
}

std::string trace_jsonl(const SystemDef& sys, const std::vector<TraceStep>& steps) {
  std::string out;
  for (const auto& st : steps) {
    out += step_json(sys, st.state, st.message);
    out += '\n';
  }
  return out;
}

std::string verdict_json(const SystemDef& sys, const Verdict& v) {
  json out = json::object();
  out["result"] = to_string(v.kind);
  if (v.has_witness()) {
    json stem = json::array(), loop = json::array();
    for (const auto& s : v.stem) stem.push_back(step_obj(sys, s.state, s.message));
    for (const auto& s : v.loop) loop.push_back(step_obj(sys, s.state, s.message));
    json w = json::object();
    w["stem"] = std::move(stem);
    w["loop"] = std::move(loop);
    out["witness"] = std::move(w);
  }
  if (!v.notes.empty()) out["notes"] = v.notes;
  return out.dump(2);
}

std::string report_json(const SystemDef& sys, const FullAbstractionReport& rep) {
  json out = json::object();
  out["equivalent"] = rep.equivalent;
  out["states_checked"] = rep.states_checked;
  out["transitions_checked"] = rep.transitions_checked;
  json divs = json::array();
  for (const auto& d : rep.divergences) {
    json e = json::object();
    e["state"] = state_json(sys, d.state);
    e["detail"] = d.detail;
    divs.push_back(std::move(e));
  }
  out["divergences"] = std::move(divs);
  if (!rep.notes.empty()) out["notes"] = rep.notes;
  return out.dump(2);
}

}  // namespace recipe
