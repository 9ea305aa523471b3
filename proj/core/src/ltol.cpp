#include "recipe/ltol.hpp"

#include <algorithm>
#include <sstream>

namespace recipe {

namespace {
DescriptorRef dnode(DNode n) { return std::make_shared<const DNode>(std::move(n)); }
FormulaRef fnode(FNode n) { return std::make_shared<const FNode>(std::move(n)); }
}  // namespace

DescriptorRef desc_const(bool v) { return dnode({v ? DKind::True : DKind::False}); }

DescriptorRef desc_chan(Sym ch, bool neq) {
  DNode n{DKind::Chan};
  n.value = ch;
  n.neq = neq;
  return dnode(std::move(n));
}

DescriptorRef desc_sender(Sym id, bool neq) {
  DNode n{DKind::Sender};
  n.value = id;
  n.neq = neq;
  return dnode(std::move(n));
}

DescriptorRef desc_data(int16_t var, Sym value, bool neq) {
  DNode n{DKind::Data};
  n.var = var;
  n.value = value;
  n.neq = neq;
  return dnode(std::move(n));
}

DescriptorRef desc_cv(int16_t var, Sym value, bool neq) {
  DNode n{DKind::Cv};
  n.var = var;
  n.value = value;
  n.neq = neq;
  return dnode(std::move(n));
}

DescriptorRef desc_exists(DescriptorRef a) {
  DNode n{DKind::Exists};
  n.a = std::move(a);
  return dnode(std::move(n));
}

DescriptorRef desc_forall(DescriptorRef a) {
  DNode n{DKind::Forall};
  n.a = std::move(a);
  return dnode(std::move(n));
}

DescriptorRef desc_or(DescriptorRef a, DescriptorRef b) {
  DNode n{DKind::Or};
  n.a = std::move(a);
  n.b = std::move(b);
  return dnode(std::move(n));
}

DescriptorRef desc_and(DescriptorRef a, DescriptorRef b) {
  DNode n{DKind::And};
  n.a = std::move(a);
  n.b = std::move(b);
  return dnode(std::move(n));
}

DescriptorRef normalize_descriptor(const DescriptorRef& d) {
  switch (d->kind) {
    case DKind::Cv:
      // Bare cv reads as all(cv); bare !cv as some(!cv).
      return d->neq ? desc_exists(d) : desc_forall(d);
    case DKind::Or: {
      auto a = normalize_descriptor(d->a);
      auto b = normalize_descriptor(d->b);
      if (a == d->a && b == d->b) return d;
      return desc_or(std::move(a), std::move(b));
    }
    case DKind::And: {
      auto a = normalize_descriptor(d->a);
      auto b = normalize_descriptor(d->b);
      if (a == d->a && b == d->b) return d;
      return desc_and(std::move(a), std::move(b));
    }
    default:
      return d;  // atoms and quantified subtrees are already normal
  }
}

DescriptorRef dual(const DescriptorRef& d) {
  switch (d->kind) {
    case DKind::True: return desc_const(false);
    case DKind::False: return desc_const(true);
    case DKind::Chan: return desc_chan(d->value, !d->neq);
    case DKind::Sender: return desc_sender(d->value, !d->neq);
    case DKind::Data: return desc_data(d->var, d->value, !d->neq);
    case DKind::Cv: return desc_cv(d->var, d->value, !d->neq);
    case DKind::Exists: return desc_forall(dual(d->a));
    case DKind::Forall: return desc_exists(dual(d->a));
    case DKind::Or: return desc_and(dual(d->a), dual(d->b));
    case DKind::And: return desc_or(dual(d->a), dual(d->b));
  }
  throw Error("corrupt descriptor node");
}

bool descriptor_equal(const DescriptorRef& a, const DescriptorRef& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case DKind::True:
    case DKind::False:
      return true;
    case DKind::Chan:
    case DKind::Sender:
    case DKind::Data:
    case DKind::Cv:
      return a->neq == b->neq && a->var == b->var && a->value == b->value;
    case DKind::Exists:
    case DKind::Forall:
      return descriptor_equal(a->a, b->a);
    case DKind::Or:
    case DKind::And:
      return descriptor_equal(a->a, b->a) && descriptor_equal(a->b, b->b);
  }
  return false;
}

size_t descriptor_hash(const DescriptorRef& a) {
  if (!a) return 0;
  size_t h = (static_cast<size_t>(a->kind) + 1) * 0x9e3779b97f4a7c15ull;
  h ^= a->neq ? 0x517cc1b727220a95ull : 0;
  h ^= static_cast<size_t>(a->var + 1) << 17;
  h ^= static_cast<size_t>(a->value + 1) << 3;
  h = h * 1099511628211ull ^ descriptor_hash(a->a);
  h = h * 1099511628211ull ^ descriptor_hash(a->b);
  return h;
}

FormulaRef f_const(bool v) { return fnode({v ? FKind::True : FKind::False}); }

FormulaRef f_atom(int16_t agent, int16_t var, Sym value, bool neq) {
  FNode n{FKind::Atom};
  n.agent = agent;
  n.var = var;
  n.value = value;
  n.neq = neq;
  return fnode(std::move(n));
}

FormulaRef f_or(FormulaRef a, FormulaRef b) {
  FNode n{FKind::Or};
  n.a = std::move(a);
  n.b = std::move(b);
  return fnode(std::move(n));
}

FormulaRef f_and(FormulaRef a, FormulaRef b) {
  FNode n{FKind::And};
  n.a = std::move(a);
  n.b = std::move(b);
  return fnode(std::move(n));
}

FormulaRef f_until(FormulaRef a, FormulaRef b) {
  FNode n{FKind::Until};
  n.a = std::move(a);
  n.b = std::move(b);
  return fnode(std::move(n));
}

FormulaRef f_release(FormulaRef a, FormulaRef b) {
  FNode n{FKind::Release};
  n.a = std::move(a);
  n.b = std::move(b);
  return fnode(std::move(n));
}

FormulaRef f_possible(DescriptorRef o, FormulaRef a) {
  FNode n{FKind::Possible};
  n.obs = std::move(o);
  n.a = std::move(a);
  return fnode(std::move(n));
}

FormulaRef f_necessary(DescriptorRef o, FormulaRef a) {
  FNode n{FKind::Necessary};
  n.obs = std::move(o);
  n.a = std::move(a);
  return fnode(std::move(n));
}

FormulaRef f_eventually(FormulaRef a) { return f_until(f_const(true), std::move(a)); }
FormulaRef f_globally(FormulaRef a) { return f_release(f_const(false), std::move(a)); }

FormulaRef f_weak_until(FormulaRef a, FormulaRef b) {
  // x W y = y R (y | x)
  return f_release(b, f_or(b, std::move(a)));
}

FormulaRef dual(const FormulaRef& f) {
  switch (f->kind) {
    case FKind::True: return f_const(false);
    case FKind::False: return f_const(true);
    case FKind::Atom: return f_atom(f->agent, f->var, f->value, !f->neq);
    case FKind::Or: return f_and(dual(f->a), dual(f->b));
    case FKind::And: return f_or(dual(f->a), dual(f->b));
    case FKind::Until: return f_release(dual(f->a), dual(f->b));
    case FKind::Release: return f_until(dual(f->a), dual(f->b));
    // The modalities swap around the same descriptor: [O]psi already
    // reads as "m does not model O, or psi next".
    case FKind::Possible: return f_necessary(f->obs, dual(f->a));
    case FKind::Necessary: return f_possible(f->obs, dual(f->a));
  }
  throw Error("corrupt formula node");
}

bool formula_equal(const FormulaRef& a, const FormulaRef& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case FKind::True:
    case FKind::False:
      return true;
    case FKind::Atom:
      return a->neq == b->neq && a->agent == b->agent && a->var == b->var &&
             a->value == b->value;
    case FKind::Possible:
    case FKind::Necessary:
      return descriptor_equal(a->obs, b->obs) && formula_equal(a->a, b->a);
    default:
      return formula_equal(a->a, b->a) && formula_equal(a->b, b->b);
  }
}

size_t formula_hash(const FormulaRef& a) {
  if (!a) return 0;
  size_t h = (static_cast<size_t>(a->kind) + 11) * 0x9e3779b97f4a7c15ull;
  h ^= a->neq ? 0x517cc1b727220a95ull : 0;
  h ^= static_cast<size_t>(a->agent + 1) << 29;
  h ^= static_cast<size_t>(a->var + 1) << 13;
  h ^= static_cast<size_t>(a->value + 1) << 2;
  h = h * 1099511628211ull ^ descriptor_hash(a->obs);
  h = h * 1099511628211ull ^ formula_hash(a->a);
  h = h * 1099511628211ull ^ formula_hash(a->b);
  return h;
}

// ---------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------

namespace {

int dprec(const DNode& n) {
  switch (n.kind) {
    case DKind::Or: return 1;
    case DKind::And: return 2;
    default: return 3;
  }
}

void dprint(const SystemDef& sys, const DescriptorRef& d, std::ostream& os, int outer) {
  int p = dprec(*d);
  bool paren = p < outer;
  if (paren) os << '(';
  switch (d->kind) {
    case DKind::True: os << "true"; break;
    case DKind::False: os << "false"; break;
    case DKind::Chan:
      os << "ch" << (d->neq ? " != " : " = ") << sys.syms.name(d->value);
      break;
    case DKind::Sender:
      if (d->neq) os << '!';
      os << sys.syms.name(d->value);
      break;
    case DKind::Data: {
      const VarDecl& v = sys.data_vars[d->var];
      if (v.domain == 0 && d->value == sys.sym_true) {
        if (d->neq) os << '!';
        os << v.name;
      } else {
        os << v.name << (d->neq ? " != " : " = ") << sys.syms.name(d->value);
      }
      break;
    }
    case DKind::Cv: {
      const VarDecl& v = sys.common_vars[d->var];
      if (v.domain == 0 && d->value == sys.sym_true) {
        if (d->neq) os << '!';
        os << v.name;
      } else {
        os << v.name << (d->neq ? " != " : " = ") << sys.syms.name(d->value);
      }
      break;
    }
    case DKind::Exists:
      os << '<';
      dprint(sys, d->a, os, 0);
      os << '>';
      break;
    case DKind::Forall:
      os << '[';
      dprint(sys, d->a, os, 0);
      os << ']';
      break;
    case DKind::Or:
      dprint(sys, d->a, os, 1);
      os << " | ";
      dprint(sys, d->b, os, 2);
      break;
    case DKind::And:
      dprint(sys, d->a, os, 2);
      os << " & ";
      dprint(sys, d->b, os, 3);
      break;
  }
  if (paren) os << ')';
}

// Formula precedence: atoms/modal=4, U/R=3, and=2, or=1.
int fprec(const FNode& n) {
  switch (n.kind) {
    case FKind::Or: return 1;
    case FKind::And: return 2;
    case FKind::Until:
    case FKind::Release: return 3;
    default: return 4;
  }
}

void fprint(const SystemDef& sys, const FormulaRef& f, std::ostream& os, int outer) {
  // Recover the G/F sugar for readability.
  if (f->kind == FKind::Release && f->a->kind == FKind::False) {
    if (outer > 4) os << '(';
    os << "G ";
    fprint(sys, f->b, os, 4);
    if (outer > 4) os << ')';
    return;
  }
  if (f->kind == FKind::Until && f->a->kind == FKind::True) {
    if (outer > 4) os << '(';
    os << "F ";
    fprint(sys, f->b, os, 4);
    if (outer > 4) os << ')';
    return;
  }
  int p = fprec(*f);
  bool paren = p < outer;
  if (paren) os << '(';
  switch (f->kind) {
    case FKind::True: os << "true"; break;
    case FKind::False: os << "false"; break;
    case FKind::Atom: {
      const AgentDef& ag = sys.agents[f->agent];
      const VarDecl& v = ag.vars[f->var];
      if (v.domain == 0 && f->value == sys.sym_true) {
        if (f->neq) os << '!';
        os << ag.name << '.' << v.name;
      } else {
        os << ag.name << '.' << v.name << (f->neq ? " != " : " = ") << sys.syms.name(f->value);
      }
      break;
    }
    case FKind::Or:
      fprint(sys, f->a, os, 1);
      os << " | ";
      fprint(sys, f->b, os, 2);
      break;
    case FKind::And:
      fprint(sys, f->a, os, 2);
      os << " & ";
      fprint(sys, f->b, os, 3);
      break;
    case FKind::Until:
      fprint(sys, f->a, os, 4);
      os << " U ";
      fprint(sys, f->b, os, 3);
      break;
    case FKind::Release:
      fprint(sys, f->a, os, 4);
      os << " R ";
      fprint(sys, f->b, os, 3);
      break;
    case FKind::Possible:
      os << '<';
      dprint(sys, f->obs, os, 0);
      os << "> ";
      fprint(sys, f->a, os, 4);
      break;
    case FKind::Necessary:
      os << '[';
      dprint(sys, f->obs, os, 0);
      os << "] ";
      fprint(sys, f->a, os, 4);
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string to_string(const SystemDef& sys, const DescriptorRef& d) {
  std::ostringstream os;
  dprint(sys, d, os, 0);
  return os.str();
}

std::string to_string(const SystemDef& sys, const FormulaRef& f) {
  std::ostringstream os;
  fprint(sys, f, os, 0);
  return os.str();
}

// ---------------------------------------------------------------------
// Semantics
// ---------------------------------------------------------------------

int agent_state_offset(const SystemDef& sys, int agent) {
  int off = 0;
  for (int i = 0; i < agent; ++i) off += static_cast<int>(sys.agents[i].vars.size());
  return off;
}

Sym state_value(const SystemDef& sys, const SystemState& s, int agent, int var) {
  return s.values[agent_state_offset(sys, agent) + var];
}

std::string to_string(const SystemDef& sys, const SystemState& s) {
  std::ostringstream os;
  int off = 0;
  for (size_t a = 0; a < sys.agents.size(); ++a) {
    if (a) os << " | ";
    os << sys.agents[a].name << ":";
    for (size_t v = 0; v < sys.agents[a].vars.size(); ++v)
      os << ' ' << sys.agents[a].vars[v].name << '=' << sys.syms.name(s.values[off + v]);
    off += static_cast<int>(sys.agents[a].vars.size());
  }
  return os.str();
}

namespace {

void collect_observations(const FormulaRef& f, std::vector<DescriptorRef>& out) {
  switch (f->kind) {
    case FKind::Possible:
    case FKind::Necessary: {
      bool seen = false;
      for (const auto& d : out)
        if (descriptor_equal(d, f->obs)) seen = true;
      if (!seen) out.push_back(f->obs);
      collect_observations(f->a, out);
      break;
    }
    case FKind::Or:
    case FKind::And:
    case FKind::Until:
    case FKind::Release:
      collect_observations(f->a, out);
      collect_observations(f->b, out);
      break;
    default:
      break;
  }
}

// ctx < 0: quantifiers range over the models of m's predicate.
// ctx >= 0: inside a quantifier; the predicate is the singleton {ctx},
// which is what makes nested quantifiers collapse onto the outermost.
bool models_rec(const SystemDef& sys, const Message& m, const DescriptorRef& d, int ctx) {
  switch (d->kind) {
    case DKind::True: return true;
    case DKind::False: return false;
    case DKind::Chan: return (m.channel == d->value) != d->neq;
    case DKind::Sender: return (m.sender == d->value) != d->neq;
    case DKind::Data: return (m.data[d->var] == d->value) != d->neq;
    case DKind::Cv: {
      if (ctx >= 0) {
        Sym v = sys.cv_assignment(ctx)[d->var];
        return (v == d->value) != d->neq;
      }
      // Bare atom outside a quantifier: cv holds when every model agrees,
      // !cv when some model disagrees.
      uint64_t bits = m.pred.models;
      for (int i = 0; bits; ++i, bits >>= 1) {
        if (!(bits & 1)) continue;
        Sym v = sys.cv_assignment(i)[d->var];
        bool sat = (v == d->value);
        if (!d->neq && !sat) return false;
        if (d->neq && !sat) return true;
      }
      return !d->neq;
    }
    case DKind::Exists: {
      if (ctx >= 0) return models_rec(sys, m, d->a, ctx);
      uint64_t bits = m.pred.models;
      for (int i = 0; bits; ++i, bits >>= 1)
        if ((bits & 1) && models_rec(sys, m, d->a, i)) return true;
      return false;
    }
    case DKind::Forall: {
      if (ctx >= 0) return models_rec(sys, m, d->a, ctx);
      uint64_t bits = m.pred.models;
      for (int i = 0; bits; ++i, bits >>= 1)
        if ((bits & 1) && !models_rec(sys, m, d->a, i)) return false;
      return true;
    }
    case DKind::Or: return models_rec(sys, m, d->a, ctx) || models_rec(sys, m, d->b, ctx);
    case DKind::And: return models_rec(sys, m, d->a, ctx) && models_rec(sys, m, d->b, ctx);
  }
  throw Error("corrupt descriptor node");
}

}  // namespace

std::vector<DescriptorRef> top_observations(const FormulaRef& f) {
  std::vector<DescriptorRef> out;
  collect_observations(f, out);
  return out;
}

bool message_models(const SystemDef& sys, const Message& m, const DescriptorRef& d) {
  return models_rec(sys, m, d, -1);
}

Letter letter_of(const SystemDef& sys, const Message& m,
                 const std::vector<DescriptorRef>& obs) {
  Letter l = 0;
  for (size_t i = 0; i < obs.size(); ++i)
    if (message_models(sys, m, obs[i])) l |= (1u << i);
  return l;
}

bool letter_models(const SystemDef& sys, const Message& m,
                   const std::vector<DescriptorRef>& obs, Letter letter) {
  for (size_t i = 0; i < obs.size(); ++i) {
    bool want = (letter >> i) & 1;
    if (message_models(sys, m, obs[i]) != want) return false;
  }
  return true;
}

namespace {

// Collects the outermost quantified subformulas of a normalized
// descriptor, deduplicated structurally. Their truth is what a candidate
// predicate has to realise.
void collect_atoms(const DescriptorRef& d, std::vector<DescriptorRef>& out) {
  switch (d->kind) {
    case DKind::Exists:
    case DKind::Forall: {
      for (const auto& x : out)
        if (descriptor_equal(x, d)) return;
      out.push_back(d);
      return;
    }
    case DKind::Or:
    case DKind::And:
      collect_atoms(d->a, out);
      collect_atoms(d->b, out);
      return;
    default:
      return;
  }
}

// Evaluates d with quantified atoms looked up in `chosen` and concrete
// atoms evaluated against (ch, data, k).
bool eval_skeleton(const SystemDef& sys, const DescriptorRef& d,
                   const std::vector<DescriptorRef>& atoms, uint64_t chosen, Sym ch,
                   const Assignment& data, Sym k) {
  switch (d->kind) {
    case DKind::True: return true;
    case DKind::False: return false;
    case DKind::Chan: return (ch == d->value) != d->neq;
    case DKind::Sender: return (k == d->value) != d->neq;
    case DKind::Data: return (data[d->var] == d->value) != d->neq;
    case DKind::Cv:
      throw Error("descriptor not normalized: bare cv atom");
    case DKind::Exists:
    case DKind::Forall: {
      for (size_t i = 0; i < atoms.size(); ++i)
        if (descriptor_equal(atoms[i], d)) return (chosen >> i) & 1;
      throw Error("quantified atom not collected");
    }
    case DKind::Or:
      return eval_skeleton(sys, d->a, atoms, chosen, ch, data, k) ||
             eval_skeleton(sys, d->b, atoms, chosen, ch, data, k);
    case DKind::And:
      return eval_skeleton(sys, d->a, atoms, chosen, ch, data, k) &&
             eval_skeleton(sys, d->b, atoms, chosen, ch, data, k);
  }
  throw Error("corrupt descriptor node");
}

AssertionRef cv_minterm(const SystemDef& sys, int index) {
  Assignment a = sys.cv_assignment(index);
  AssertionRef out;
  for (size_t i = 0; i < sys.common_vars.size(); ++i) {
    const VarDecl& v = sys.common_vars[i];
    AssertionRef atom = make_cmp(
        Term::ref(Scope::Common, static_cast<int16_t>(i), static_cast<int16_t>(v.domain),
                  v.name_sym),
        Term::constant(a[i]), false);
    out = out ? make_and(std::move(out), std::move(atom)) : atom;
  }
  return out ? out : make_true();
}

AssertionRef predicate_formula(const SystemDef& sys, uint64_t bits) {
  if (bits == 0) return make_false();
  AssertionRef out;
  for (int i = 0; bits; ++i, bits >>= 1) {
    if (!(bits & 1)) continue;
    AssertionRef term = cv_minterm(sys, i);
    out = out ? make_or(std::move(out), std::move(term)) : term;
  }
  return out;
}

}  // namespace

std::optional<Message> letter_satisfiable(const SystemDef& sys,
                                          const std::vector<DescriptorRef>& obs,
                                          Letter letter) {
  // The letter is satisfiable iff the conjunction of its descriptors and
  // the duals of the omitted ones is.
  std::vector<DescriptorRef> conj;
  for (size_t i = 0; i < obs.size(); ++i)
    conj.push_back(normalize_descriptor(((letter >> i) & 1) ? obs[i] : dual(obs[i])));

  std::vector<DescriptorRef> atoms;
  for (const auto& d : conj) collect_atoms(d, atoms);
  if (atoms.size() > 20) throw Error("letter satisfiability: too many quantified atoms");

  const int cv_space = static_cast<int>(sys.cv_space_size());
  Message m;
  m.data.resize(sys.data_vars.size());

  for (Sym ch : sys.channels) {
    for (const AgentDef& ag : sys.agents) {
      AssignmentEnumerator de(sys, sys.data_vars);
      while (const Assignment* d = de.next()) {
        // Model sets of each atom body over singleton predicates.
        std::vector<uint64_t> body_models(atoms.size(), 0);
        for (size_t i = 0; i < atoms.size(); ++i) {
          Message probe;
          probe.channel = ch;
          probe.sender = ag.id;
          probe.data = *d;
          for (int c = 0; c < cv_space; ++c) {
            probe.pred.models = 1ull << c;
            if (message_models(sys, probe, atoms[i]->a)) body_models[i] |= 1ull << c;
          }
        }
        for (uint64_t chosen = 0; chosen < (1ull << atoms.size()); ++chosen) {
          // Realizability: every chosen existential needs a witness that
          // also satisfies every chosen universal's body.
          uint64_t universal_core = ~0ull;
          if (cv_space < 64) universal_core = (1ull << cv_space) - 1;
          for (size_t i = 0; i < atoms.size(); ++i)
            if (((chosen >> i) & 1) && atoms[i]->kind == DKind::Forall)
              universal_core &= body_models[i];
          uint64_t pred = 0;
          bool realizable = true;
          for (size_t i = 0; i < atoms.size(); ++i) {
            if (!((chosen >> i) & 1) || atoms[i]->kind != DKind::Exists) continue;
            uint64_t candidates = body_models[i] & universal_core;
            if (!candidates) {
              realizable = false;
              break;
            }
            pred |= candidates & (~candidates + 1);  // lowest witness bit
          }
          if (!realizable) continue;
          bool ok = true;
          for (const auto& dsc : conj)
            if (!eval_skeleton(sys, dsc, atoms, chosen, ch, *d, ag.id)) {
              ok = false;
              break;
            }
          if (!ok) continue;
          m.channel = ch;
          m.sender = ag.id;
          m.data = *d;
          m.pred.models = pred;
          m.pred.formula = predicate_formula(sys, pred);
          if (letter_models(sys, m, obs, letter)) return m;
        }
      }
    }
  }
  return std::nullopt;
}

bool eval_formula(const SystemDef& sys, const FormulaRef& f, const Lasso& lasso) {
  if (lasso.loop.empty()) throw Error("eval_formula: empty loop");
  std::vector<const LassoStep*> steps;
  for (const auto& s : lasso.stem) steps.push_back(&s);
  for (const auto& s : lasso.loop) steps.push_back(&s);
  const int n = static_cast<int>(steps.size());
  const int back = static_cast<int>(lasso.stem.size());
  auto nxt = [&](int i) { return i + 1 < n ? i + 1 : back; };

  // Truth vector per subformula, children first. unordered_map keeps
  // references stable while nested computations insert.
  std::unordered_map<const FNode*, std::vector<char>> table;
  auto compute = [&](auto&& self, const FormulaRef& g) -> const std::vector<char>& {
    auto it = table.find(g.get());
    if (it != table.end()) return it->second;
    std::vector<char> v(n, 0);
    switch (g->kind) {
      case FKind::True: std::fill(v.begin(), v.end(), 1); break;
      case FKind::False: break;
      case FKind::Atom:
        for (int i = 0; i < n; ++i) {
          Sym val = state_value(sys, steps[i]->state, g->agent, g->var);
          v[i] = ((val == g->value) != g->neq) ? 1 : 0;
        }
        break;
      case FKind::Or: {
        const auto& a = self(self, g->a);
        const auto& b = self(self, g->b);
        for (int i = 0; i < n; ++i) v[i] = a[i] | b[i];
        break;
      }
      case FKind::And: {
        const auto& a = self(self, g->a);
        const auto& b = self(self, g->b);
        for (int i = 0; i < n; ++i) v[i] = a[i] & b[i];
        break;
      }
      case FKind::Possible: {
        const auto& a = self(self, g->a);
        for (int i = 0; i < n; ++i)
          v[i] = (message_models(sys, steps[i]->message, g->obs) && a[nxt(i)]) ? 1 : 0;
        break;
      }
      case FKind::Necessary: {
        const auto& a = self(self, g->a);
        for (int i = 0; i < n; ++i)
          v[i] = (!message_models(sys, steps[i]->message, g->obs) || a[nxt(i)]) ? 1 : 0;
        break;
      }
      case FKind::Until: {
        const auto& a = self(self, g->a);
        const auto& b = self(self, g->b);
        // Least fixpoint from false.
        bool changed = true;
        while (changed) {
          changed = false;
          for (int i = n - 1; i >= 0; --i) {
            char nv = b[i] | (a[i] & v[nxt(i)]);
            if (nv != v[i]) {
              v[i] = nv;
              changed = true;
            }
          }
        }
        break;
      }
      case FKind::Release: {
        const auto& a = self(self, g->a);
        const auto& b = self(self, g->b);
        // Greatest fixpoint from true.
        std::fill(v.begin(), v.end(), 1);
        bool changed = true;
        while (changed) {
          changed = false;
          for (int i = n - 1; i >= 0; --i) {
            char nv = b[i] & (a[i] | v[nxt(i)]);
            if (nv != v[i]) {
              v[i] = nv;
              changed = true;
            }
          }
        }
        break;
      }
    }
    return table.emplace(g.get(), std::move(v)).first->second;
  };
  return compute(compute, f)[0] != 0;
}

}  // namespace recipe
