#pragma once

#include <memory>
#include <string>

#include "recipe/symbols.hpp"

namespace recipe {

struct SystemDef;

/// Variable scopes an assertion may refer to. `LocalNext` is the primed
/// copy of the agent's local variables and is only legal inside
/// transition relations.
enum class Scope : uint8_t { LocalCur, LocalNext, Data, Common, Channel };

/// Either a constant symbol or a resolved variable reference.
struct Term {
  bool is_const = true;
  Sym value = kNoSym;   // constant, or variable name symbol for refs
  Scope scope = Scope::LocalCur;
  int16_t index = -1;   // position within the scope's declaration list
  int16_t domain = -1;  // domain table index; -1 for the channel pseudo-domain

  static Term constant(Sym v) {
    Term t;
    t.is_const = true;
    t.value = v;
    return t;
  }
  static Term ref(Scope s, int16_t idx, int16_t dom, Sym name = kNoSym) {
    Term t;
    t.is_const = false;
    t.scope = s;
    t.index = idx;
    t.domain = dom;
    t.value = name;
    return t;
  }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.is_const != b.is_const) return false;
    if (a.is_const) return a.value == b.value;
    return a.scope == b.scope && a.index == b.index;
  }
};

enum class AKind : uint8_t { True, False, Cmp, Not, And, Or, Implies, ExistsCv, ForallCv };

struct ANode;
using AssertionRef = std::shared_ptr<const ANode>;

/// Immutable assertion AST node. Comparisons are restricted to = and !=;
/// quantifiers range over the whole common-variable set at once.
struct ANode {
  AKind kind;
  bool neq = false;  // Cmp: true for !=
  Term lhs, rhs;     // Cmp
  AssertionRef a, b; // children (unary ops use a)
};

AssertionRef make_true();
AssertionRef make_false();
AssertionRef make_const(bool v);
AssertionRef make_cmp(Term lhs, Term rhs, bool neq);
AssertionRef make_not(AssertionRef a);
AssertionRef make_and(AssertionRef a, AssertionRef b);
AssertionRef make_or(AssertionRef a, AssertionRef b);
AssertionRef make_implies(AssertionRef a, AssertionRef b);
AssertionRef make_exists_cv(AssertionRef a);
AssertionRef make_forall_cv(AssertionRef a);

bool assertion_equal(const AssertionRef& a, const AssertionRef& b);
size_t assertion_hash(const AssertionRef& a);

/// Evaluation environment. A null slot leaves the whole scope unbound; a
/// kNoSym entry leaves one variable unbound. eval throws on an unbound
/// reference, partial_eval leaves the reference in place.
struct Env {
  const Sym* cur = nullptr;
  const Sym* next = nullptr;
  const Sym* data = nullptr;
  const Sym* common = nullptr;
  Sym channel = kNoSym;
};

/// Standard first-order evaluation. Quantifiers over the common-variable
/// set enumerate all CV assignments.
bool eval(const SystemDef& sys, const AssertionRef& a, const Env& env);

/// Substitutes the bound slots of `env` and constant-folds. The result is
/// logically equivalent to `a` under the binding and mentions only the
/// remaining variables.
AssertionRef partial_eval(const SystemDef& sys, const AssertionRef& a, const Env& env);

/// Renders an assertion in the concrete surface syntax (reparseable).
std::string to_string(const SystemDef& sys, const AssertionRef& a);
std::string to_string(const SystemDef& sys, const Term& t);

}  // namespace recipe
