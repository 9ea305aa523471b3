#include "recipe/model.hpp"

#include <algorithm>
#include <sstream>

namespace recipe {

SystemDef::SystemDef() {
  sym_false = syms.intern("false");
  sym_true = syms.intern("true");
  star = syms.intern("*");
  domains.push_back(Domain{"bool", {sym_false, sym_true}});
  channels.push_back(star);
}

int SystemDef::intern_domain(const std::string& name, const std::vector<Sym>& values) {
  for (size_t i = 0; i < domains.size(); ++i)
    if (domains[i].values == values) return static_cast<int>(i);
  domains.push_back(Domain{name, values});
  return static_cast<int>(domains.size() - 1);
}

uint64_t SystemDef::space_size(const std::vector<VarDecl>& vars) const {
  uint64_t n = 1;
  for (const auto& v : vars) n *= static_cast<uint64_t>(domains[v.domain].size());
  return n;
}

int SystemDef::cv_index(std::span<const Sym> cv_values) const {
  int idx = 0;
  for (size_t i = 0; i < common_vars.size(); ++i) {
    const Domain& d = domains[common_vars[i].domain];
    int vi = d.index_of(cv_values[i]);
    if (vi < 0) throw Error("value out of domain for @" + common_vars[i].name);
    idx = idx * d.size() + vi;
  }
  return idx;
}

Assignment SystemDef::cv_assignment(int index) const {
  Assignment out(common_vars.size());
  for (int i = static_cast<int>(common_vars.size()) - 1; i >= 0; --i) {
    const Domain& d = domains[common_vars[i].domain];
    out[i] = d.values[index % d.size()];
    index /= d.size();
  }
  return out;
}

AssignmentEnumerator::AssignmentEnumerator(const SystemDef& sys,
                                           const std::vector<VarDecl>& vars)
    : sys_(sys), vars_(vars), idx_(vars.size(), 0) {
  current_.resize(vars.size());
  for (size_t i = 0; i < vars.size(); ++i) {
    const Domain& d = sys.domains[vars[i].domain];
    if (d.size() == 0) done_ = true;
    else current_[i] = d.values[0];
  }
}

const Assignment* AssignmentEnumerator::next() {
  if (done_) return nullptr;
  if (first_) {
    first_ = false;
    return &current_;
  }
  int p = static_cast<int>(vars_.size()) - 1;
  while (p >= 0) {
    const Domain& d = sys_.domains[vars_[p].domain];
    if (++idx_[p] < d.size()) {
      current_[p] = d.values[idx_[p]];
      return &current_;
    }
    idx_[p] = 0;
    current_[p] = d.values[0];
    --p;
  }
  done_ = true;
  return nullptr;
}

void enumerate_assignments(const SystemDef& sys, const std::vector<VarDecl>& vars,
                           const std::function<void(const Assignment&)>& fn) {
  AssignmentEnumerator en(sys, vars);
  while (const Assignment* a = en.next()) fn(*a);
}

CvPredicate make_cv_predicate(const SystemDef& sys, AssertionRef formula) {
  uint64_t space = sys.cv_space_size();
  if (space > 64) throw Error("common-variable space exceeds 64 assignments");
  CvPredicate p;
  p.formula = std::move(formula);
  Env env;
  int bit = 0;
  AssignmentEnumerator en(sys, sys.common_vars);
  while (const Assignment* a = en.next()) {
    env.common = a->data();
    if (eval(sys, p.formula, env)) p.models |= (1ull << bit);
    ++bit;
  }
  return p;
}

bool satisfiable_cv(const SystemDef& sys, const AssertionRef& pi) {
  Env env;
  AssignmentEnumerator en(sys, sys.common_vars);
  while (const Assignment* a = en.next()) {
    env.common = a->data();
    if (eval(sys, pi, env)) return true;
  }
  return false;
}

std::vector<Assignment> models_of_cv(const SystemDef& sys, const AssertionRef& pi) {
  std::vector<Assignment> out;
  Env env;
  AssignmentEnumerator en(sys, sys.common_vars);
  while (const Assignment* a = en.next()) {
    env.common = a->data();
    if (eval(sys, pi, env)) out.push_back(*a);
  }
  return out;
}

std::string to_string(const SystemDef& sys, const Message& m) {
  std::ostringstream os;
  os << "<" << sys.syms.name(m.channel) << ", {";
  for (size_t i = 0; i < m.data.size(); ++i) {
    if (i) os << ", ";
    os << sys.data_vars[i].name << ": " << sys.syms.name(m.data[i]);
  }
  os << "}, " << sys.syms.name(m.sender) << ", " << to_string(sys, m.pred.formula) << ">";
  return os.str();
}

namespace {

std::string describe_assignment(const SystemDef& sys, const std::vector<VarDecl>& vars,
                                const Assignment& a) {
  std::ostringstream os;
  for (size_t i = 0; i < vars.size(); ++i) {
    if (i) os << ", ";
    os << vars[i].name << "=" << sys.syms.name(a[i]);
  }
  return os.str();
}

// Every Cmp must compare terms whose domains share at least one value.
void check_comparisons(const SystemDef& sys, const AssertionRef& a, const std::string& where,
                       std::vector<std::string>& out) {
  if (!a) return;
  if (a->kind == AKind::Cmp) {
    const Term& l = a->lhs;
    const Term& r = a->rhs;
    auto values_of = [&](const Term& t) -> std::vector<Sym> {
      if (t.is_const) return {t.value};
      if (t.scope == Scope::Channel) return sys.channels;
      return sys.domains[t.domain].values;
    };
    auto lv = values_of(l);
    auto rv = values_of(r);
    bool overlap = false;
    for (Sym x : lv)
      for (Sym y : rv)
        if (x == y) overlap = true;
    if (!overlap) {
      out.push_back(where + ": type mismatch, domains of " + to_string(sys, l) + " and " +
                    to_string(sys, r) + " share no value");
    }
    return;
  }
  check_comparisons(sys, a->a, where, out);
  check_comparisons(sys, a->b, where, out);
}

}  // namespace

std::vector<std::string> validate_system(const SystemDef& sys) {
  std::vector<std::string> errs;

  if (sys.channels.empty() || sys.channels[0] != sys.star)
    errs.push_back("channel set must contain the broadcast channel *");
  for (size_t i = 0; i < sys.channels.size(); ++i)
    for (size_t j = i + 1; j < sys.channels.size(); ++j)
      if (sys.channels[i] == sys.channels[j])
        errs.push_back("duplicate channel " + sys.syms.name(sys.channels[i]));

  for (const auto& d : sys.domains) {
    if (d.values.empty()) errs.push_back("empty domain " + d.name);
    for (size_t i = 0; i < d.values.size(); ++i)
      for (size_t j = i + 1; j < d.values.size(); ++j)
        if (d.values[i] == d.values[j])
          errs.push_back("duplicate value " + sys.syms.name(d.values[i]) + " in domain " + d.name);
  }

  if (sys.agents.empty()) errs.push_back("system declares no agents");
  for (size_t i = 0; i < sys.agents.size(); ++i)
    for (size_t j = i + 1; j < sys.agents.size(); ++j)
      if (sys.agents[i].id == sys.agents[j].id)
        errs.push_back("duplicate agent identity " + sys.agents[i].name);

  if (sys.cv_space_size() > 64)
    errs.push_back("common-variable space exceeds the supported 64 assignments");

  for (const AgentDef& ag : sys.agents) {
    const std::string where = "agent " + ag.name;

    if (ag.relabel.size() != sys.common_vars.size()) {
      errs.push_back(where + ": renaming must cover every common variable");
      continue;
    }
    for (size_t cv = 0; cv < sys.common_vars.size(); ++cv) {
      int li = ag.relabel[cv];
      if (li < 0 || li >= static_cast<int>(ag.vars.size())) {
        errs.push_back(where + ": renaming of @" + sys.common_vars[cv].name +
                       " names no local variable");
        continue;
      }
      const Domain& image = sys.domains[ag.vars[li].domain];
      const Domain& cvdom = sys.domains[sys.common_vars[cv].domain];
      for (Sym v : image.values)
        if (!cvdom.contains(v))
          errs.push_back(where + ": local image " + ag.vars[li].name + " of @" +
                         sys.common_vars[cv].name + " admits value " + sys.syms.name(v) +
                         " outside the common domain");
    }

    for (size_t i = 0; i < ag.vars.size(); ++i)
      for (size_t j = i + 1; j < ag.vars.size(); ++j)
        if (ag.vars[i].name == ag.vars[j].name)
          errs.push_back(where + ": duplicate variable " + ag.vars[i].name);

    check_comparisons(sys, ag.init, where + " init", errs);
    check_comparisons(sys, ag.send_guard, where + " send-guard", errs);
    check_comparisons(sys, ag.recv_guard, where + " recv-guard", errs);
    check_comparisons(sys, ag.send_rel, where + " send", errs);
    check_comparisons(sys, ag.recv_rel, where + " recv", errs);
    if (!errs.empty()) continue;

    // g_r(*) must hold in every state: every agent is always connected to
    // the broadcast channel.
    {
      Env env;
      env.channel = sys.star;
      AssignmentEnumerator en(sys, ag.vars);
      while (const Assignment* s = en.next()) {
        env.cur = s->data();
        if (!eval(sys, ag.recv_guard, env)) {
          errs.push_back(where + ": recv-guard rejects the broadcast channel in state [" +
                         describe_assignment(sys, ag.vars, *s) + "]");
          break;
        }
      }
    }

    // Broadcast input-enabledness: for every state and data valuation some
    // receive successor exists on *.
    {
      Env env;
      env.channel = sys.star;
      AssignmentEnumerator se(sys, ag.vars);
      bool reported = false;
      while (const Assignment* s = se.next()) {
        if (reported) break;
        env.cur = s->data();
        AssignmentEnumerator de(sys, sys.data_vars);
        while (const Assignment* d = de.next()) {
          env.data = d->data();
          // Try the stutter successor first; it is the common case.
          env.next = s->data();
          if (eval(sys, ag.recv_rel, env)) continue;
          bool enabled = false;
          AssignmentEnumerator ne(sys, ag.vars);
          while (const Assignment* nx = ne.next()) {
            env.next = nx->data();
            if (eval(sys, ag.recv_rel, env)) {
              enabled = true;
              break;
            }
          }
          if (!enabled) {
            errs.push_back(where + ": not broadcast input-enabled in state [" +
                           describe_assignment(sys, ag.vars, *s) + "] for data [" +
                           describe_assignment(sys, sys.data_vars, *d) + "]");
            reported = true;
            break;
          }
        }
      }
    }
  }

  return errs;
}

void validate_system_or_throw(const SystemDef& sys) {
  auto errs = validate_system(sys);
  if (!errs.empty()) throw Error(errs.front());
}

}  // namespace recipe
