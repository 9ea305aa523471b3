#include "recipe/assertion.hpp"

#include <sstream>

#include "recipe/model.hpp"

namespace recipe {

namespace {

AssertionRef node(ANode n) { return std::make_shared<const ANode>(std::move(n)); }

const AssertionRef& true_node() {
  static const AssertionRef n = node({AKind::True});
  return n;
}
const AssertionRef& false_node() {
  static const AssertionRef n = node({AKind::False});
  return n;
}

}  // namespace

AssertionRef make_true() { return true_node(); }
AssertionRef make_false() { return false_node(); }
AssertionRef make_const(bool v) { return v ? true_node() : false_node(); }

AssertionRef make_cmp(Term lhs, Term rhs, bool neq) {
  ANode n{AKind::Cmp};
  n.neq = neq;
  n.lhs = lhs;
  n.rhs = rhs;
  return node(std::move(n));
}

AssertionRef make_not(AssertionRef a) {
  ANode n{AKind::Not};
  n.a = std::move(a);
  return node(std::move(n));
}

AssertionRef make_and(AssertionRef a, AssertionRef b) {
  ANode n{AKind::And};
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

AssertionRef make_or(AssertionRef a, AssertionRef b) {
  ANode n{AKind::Or};
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

AssertionRef make_implies(AssertionRef a, AssertionRef b) {
  ANode n{AKind::Implies};
  n.a = std::move(a);
  n.b = std::move(b);
  return node(std::move(n));
}

AssertionRef make_exists_cv(AssertionRef a) {
  ANode n{AKind::ExistsCv};
  n.a = std::move(a);
  return node(std::move(n));
}

AssertionRef make_forall_cv(AssertionRef a) {
  ANode n{AKind::ForallCv};
  n.a = std::move(a);
  return node(std::move(n));
}

bool assertion_equal(const AssertionRef& a, const AssertionRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case AKind::True:
    case AKind::False:
      return true;
    case AKind::Cmp:
      return a->neq == b->neq && a->lhs == b->lhs && a->rhs == b->rhs;
    case AKind::Not:
    case AKind::ExistsCv:
    case AKind::ForallCv:
      return assertion_equal(a->a, b->a);
    default:
      return assertion_equal(a->a, b->a) && assertion_equal(a->b, b->b);
  }
}

size_t assertion_hash(const AssertionRef& a) {
  if (!a) return 0;
  size_t h = static_cast<size_t>(a->kind) * 0x9e3779b97f4a7c15ull;
  auto mix = [&h](size_t v) { h = (h ^ v) * 1099511628211ull; };
  if (a->kind == AKind::Cmp) {
    mix(a->neq);
    mix(a->lhs.is_const ? static_cast<size_t>(a->lhs.value)
                        : (static_cast<size_t>(a->lhs.scope) << 24 | static_cast<size_t>(a->lhs.index + 1)));
    mix(a->rhs.is_const ? static_cast<size_t>(a->rhs.value)
                        : (static_cast<size_t>(a->rhs.scope) << 24 | static_cast<size_t>(a->rhs.index + 1)));
  } else {
    mix(assertion_hash(a->a));
    mix(assertion_hash(a->b));
  }
  return h;
}

namespace {

Sym resolve_term(const SystemDef& sys, const Term& t, const Env& env) {
  if (t.is_const) return t.value;
  const Sym* slot = nullptr;
  switch (t.scope) {
    case Scope::LocalCur: slot = env.cur; break;
    case Scope::LocalNext: slot = env.next; break;
    case Scope::Data: slot = env.data; break;
    case Scope::Common: slot = env.common; break;
    case Scope::Channel:
      if (env.channel == kNoSym) throw Error("unbound variable: ch");
      return env.channel;
  }
  if (slot == nullptr || slot[t.index] == kNoSym)
    throw Error("unbound variable: " + to_string(sys, t));
  return slot[t.index];
}

bool term_bound(const Term& t, const Env& env) {
  if (t.is_const) return true;
  switch (t.scope) {
    case Scope::LocalCur: return env.cur && env.cur[t.index] != kNoSym;
    case Scope::LocalNext: return env.next && env.next[t.index] != kNoSym;
    case Scope::Data: return env.data && env.data[t.index] != kNoSym;
    case Scope::Common: return env.common && env.common[t.index] != kNoSym;
    case Scope::Channel: return env.channel != kNoSym;
  }
  return false;
}

// Shared scratch-free CV odometer: invokes fn with each full CV
// assignment; stops early when fn returns false.
bool for_each_cv(const SystemDef& sys, const std::function<bool(const Sym*)>& fn) {
  const auto& cvs = sys.common_vars;
  if (cvs.empty()) {
    return fn(nullptr);
  }
  std::vector<int> idx(cvs.size(), 0);
  std::vector<Sym> vals(cvs.size());
  for (size_t i = 0; i < cvs.size(); ++i) vals[i] = sys.domains[cvs[i].domain].values[0];
  for (;;) {
    if (!fn(vals.data())) return false;
    int p = static_cast<int>(cvs.size()) - 1;
    while (p >= 0) {
      const Domain& d = sys.domains[cvs[p].domain];
      if (++idx[p] < d.size()) {
        vals[p] = d.values[idx[p]];
        break;
      }
      idx[p] = 0;
      vals[p] = d.values[0];
      --p;
    }
    if (p < 0) return true;
  }
}

}  // namespace

bool eval(const SystemDef& sys, const AssertionRef& a, const Env& env) {
  switch (a->kind) {
    case AKind::True: return true;
    case AKind::False: return false;
    case AKind::Cmp: {
      Sym l = resolve_term(sys, a->lhs, env);
      Sym r = resolve_term(sys, a->rhs, env);
      return (l == r) != a->neq;
    }
    case AKind::Not: return !eval(sys, a->a, env);
    case AKind::And: return eval(sys, a->a, env) && eval(sys, a->b, env);
    case AKind::Or: return eval(sys, a->a, env) || eval(sys, a->b, env);
    case AKind::Implies: return !eval(sys, a->a, env) || eval(sys, a->b, env);
    case AKind::ExistsCv: {
      Env inner = env;
      bool found = false;
      for_each_cv(sys, [&](const Sym* cv) {
        inner.common = cv;
        if (eval(sys, a->a, inner)) {
          found = true;
          return false;
        }
        return true;
      });
      return found;
    }
    case AKind::ForallCv: {
      Env inner = env;
      bool all = true;
      for_each_cv(sys, [&](const Sym* cv) {
        inner.common = cv;
        if (!eval(sys, a->a, inner)) {
          all = false;
          return false;
        }
        return true;
      });
      return all;
    }
  }
  throw Error("corrupt assertion node");
}

AssertionRef partial_eval(const SystemDef& sys, const AssertionRef& a, const Env& env) {
  switch (a->kind) {
    case AKind::True:
    case AKind::False:
      return a;
    case AKind::Cmp: {
      bool lb = term_bound(a->lhs, env);
      bool rb = term_bound(a->rhs, env);
      if (lb && rb) {
        Sym l = resolve_term(sys, a->lhs, env);
        Sym r = resolve_term(sys, a->rhs, env);
        return make_const((l == r) != a->neq);
      }
      Term lhs = a->lhs, rhs = a->rhs;
      if (lb) lhs = Term::constant(resolve_term(sys, a->lhs, env));
      if (rb) rhs = Term::constant(resolve_term(sys, a->rhs, env));
      // A constant outside the other side's domain decides the atom.
      const Term& c = lhs.is_const ? lhs : rhs;
      const Term& v = lhs.is_const ? rhs : lhs;
      if (c.is_const && !v.is_const && v.domain >= 0 &&
          !sys.domains[v.domain].contains(c.value)) {
        return make_const(a->neq);
      }
      if (lhs == a->lhs && rhs == a->rhs) return a;
      return make_cmp(lhs, rhs, a->neq);
    }
    case AKind::Not: {
      AssertionRef x = partial_eval(sys, a->a, env);
      if (x->kind == AKind::True) return make_false();
      if (x->kind == AKind::False) return make_true();
      if (x == a->a) return a;
      return make_not(std::move(x));
    }
    case AKind::And: {
      AssertionRef x = partial_eval(sys, a->a, env);
      if (x->kind == AKind::False) return make_false();
      AssertionRef y = partial_eval(sys, a->b, env);
      if (y->kind == AKind::False) return make_false();
      if (x->kind == AKind::True) return y;
      if (y->kind == AKind::True) return x;
      if (x == a->a && y == a->b) return a;
      return make_and(std::move(x), std::move(y));
    }
    case AKind::Or: {
      AssertionRef x = partial_eval(sys, a->a, env);
      if (x->kind == AKind::True) return make_true();
      AssertionRef y = partial_eval(sys, a->b, env);
      if (y->kind == AKind::True) return make_true();
      if (x->kind == AKind::False) return y;
      if (y->kind == AKind::False) return x;
      if (x == a->a && y == a->b) return a;
      return make_or(std::move(x), std::move(y));
    }
    case AKind::Implies: {
      AssertionRef x = partial_eval(sys, a->a, env);
      if (x->kind == AKind::False) return make_true();
      AssertionRef y = partial_eval(sys, a->b, env);
      if (x->kind == AKind::True) return y;
      if (y->kind == AKind::True) return make_true();
      if (y->kind == AKind::False) return make_not(std::move(x));
      if (x == a->a && y == a->b) return a;
      return make_implies(std::move(x), std::move(y));
    }
    case AKind::ExistsCv:
    case AKind::ForallCv: {
      // The quantifier shadows the common variables.
      Env inner = env;
      inner.common = nullptr;
      AssertionRef body = partial_eval(sys, a->a, inner);
      if (body->kind == AKind::True || body->kind == AKind::False) return body;
      if (body == a->a) return a;
      return a->kind == AKind::ExistsCv ? make_exists_cv(std::move(body))
                                        : make_forall_cv(std::move(body));
    }
  }
  throw Error("corrupt assertion node");
}

namespace {

// Precedence levels for printing: atom=4, not=3, and=2, or=1, implies=0.
int prec(const ANode& n) {
  switch (n.kind) {
    case AKind::Implies: return 0;
    case AKind::Or: return 1;
    case AKind::And: return 2;
    case AKind::Not:
    case AKind::ExistsCv:
    case AKind::ForallCv: return 3;
    default: return 4;
  }
}

bool is_bool_true_term(const SystemDef& sys, const Term& t) {
  return t.is_const && t.value == sys.sym_true;
}

void print(const SystemDef& sys, const AssertionRef& a, std::ostream& os, int outer) {
  int p = prec(*a);
  bool paren = p < outer;
  if (paren) os << '(';
  switch (a->kind) {
    case AKind::True: os << "true"; break;
    case AKind::False: os << "false"; break;
    case AKind::Cmp:
      // Boolean sugar: `x = true` prints as `x`, `x != true` as `!x`.
      if (!a->lhs.is_const && a->lhs.domain == 0 && is_bool_true_term(sys, a->rhs)) {
        if (a->neq) os << '!';
        os << to_string(sys, a->lhs);
      } else {
        os << to_string(sys, a->lhs) << (a->neq ? " != " : " = ") << to_string(sys, a->rhs);
      }
      break;
    case AKind::Not:
      os << '!';
      print(sys, a->a, os, 4);
      break;
    case AKind::And:
      print(sys, a->a, os, 2);
      os << " & ";
      print(sys, a->b, os, 3);
      break;
    case AKind::Or:
      print(sys, a->a, os, 1);
      os << " | ";
      print(sys, a->b, os, 2);
      break;
    case AKind::Implies:
      print(sys, a->a, os, 1);
      os << " -> ";
      print(sys, a->b, os, 0);
      break;
    case AKind::ExistsCv:
      os << "exists ";
      print(sys, a->a, os, 4);
      break;
    case AKind::ForallCv:
      os << "forall ";
      print(sys, a->a, os, 4);
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string to_string(const SystemDef& sys, const Term& t) {
  if (t.is_const) return sys.syms.name(t.value);
  switch (t.scope) {
    case Scope::Channel: return "ch";
    case Scope::Common: return "@" + sys.common_vars[t.index].name;
    case Scope::Data: return "d(" + sys.data_vars[t.index].name + ")";
    case Scope::LocalCur: return sys.syms.name(t.value);
    case Scope::LocalNext: return sys.syms.name(t.value) + "'";
  }
  return "?";
}

std::string to_string(const SystemDef& sys, const AssertionRef& a) {
  std::ostringstream os;
  print(sys, a, os, 0);
  return os.str();
}

}  // namespace recipe
