#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recipe/model.hpp"

namespace recipe {

// ---------------------------------------------------------------------
// Observation descriptors
// ---------------------------------------------------------------------

enum class DKind : uint8_t { True, False, Chan, Sender, Data, Cv, Exists, Forall, Or, And };

struct DNode;
using DescriptorRef = std::shared_ptr<const DNode>;

/// Observation-descriptor AST. Atoms compare the channel, sender identity
/// or a data/common variable; quantifiers range over the assignments of
/// the sender predicate. After normalisation a Cv atom occurs only under
/// a quantifier (a bare cv reads as all(cv), a bare !cv as some(!cv)).
struct DNode {
  DKind kind;
  bool neq = false;
  int16_t var = -1;   // Data/Cv: variable index in its declaration list
  Sym value = kNoSym; // Chan/Sender: the symbol; Data/Cv: compared value
  DescriptorRef a, b;
};

DescriptorRef desc_const(bool v);
DescriptorRef desc_chan(Sym ch, bool neq);
DescriptorRef desc_sender(Sym id, bool neq);
DescriptorRef desc_data(int16_t var, Sym value, bool neq);
DescriptorRef desc_cv(int16_t var, Sym value, bool neq);
DescriptorRef desc_exists(DescriptorRef a);
DescriptorRef desc_forall(DescriptorRef a);
DescriptorRef desc_or(DescriptorRef a, DescriptorRef b);
DescriptorRef desc_and(DescriptorRef a, DescriptorRef b);

/// Wraps stray top-level cv atoms into their quantified normal form.
DescriptorRef normalize_descriptor(const DescriptorRef& d);

DescriptorRef dual(const DescriptorRef& d);
bool descriptor_equal(const DescriptorRef& a, const DescriptorRef& b);
size_t descriptor_hash(const DescriptorRef& a);
std::string to_string(const SystemDef& sys, const DescriptorRef& d);

// ---------------------------------------------------------------------
// Formulas (positive normal form)
// ---------------------------------------------------------------------

enum class FKind : uint8_t { True, False, Atom, Or, And, Until, Release, Possible, Necessary };

struct FNode;
using FormulaRef = std::shared_ptr<const FNode>;

/// LTOL formula in positive normal form: negation occurs only in atoms
/// (as !=). The next operator is replaced by the observation modalities
/// <O> (possible) and [O] (necessary).
struct FNode {
  FKind kind;
  bool neq = false;
  int16_t agent = -1, var = -1;  // Atom: agent-local state variable
  Sym value = kNoSym;
  DescriptorRef obs;  // Possible/Necessary
  FormulaRef a, b;
};

FormulaRef f_const(bool v);
FormulaRef f_atom(int16_t agent, int16_t var, Sym value, bool neq);
FormulaRef f_or(FormulaRef a, FormulaRef b);
FormulaRef f_and(FormulaRef a, FormulaRef b);
FormulaRef f_until(FormulaRef a, FormulaRef b);
FormulaRef f_release(FormulaRef a, FormulaRef b);
FormulaRef f_possible(DescriptorRef o, FormulaRef a);
FormulaRef f_necessary(DescriptorRef o, FormulaRef a);
// Abbreviations: F x = true U x, G x = false R x, x W y = y R (y | x).
FormulaRef f_eventually(FormulaRef a);
FormulaRef f_globally(FormulaRef a);
FormulaRef f_weak_until(FormulaRef a, FormulaRef b);

FormulaRef dual(const FormulaRef& f);
bool formula_equal(const FormulaRef& a, const FormulaRef& b);
size_t formula_hash(const FormulaRef& a);
std::string to_string(const SystemDef& sys, const FormulaRef& f);

// ---------------------------------------------------------------------
// Semantics
// ---------------------------------------------------------------------

/// Global system state: concatenation of all agents' local assignments,
/// in declaration order.
struct SystemState {
  std::vector<Sym> values;

  friend bool operator==(const SystemState& a, const SystemState& b) {
    return a.values == b.values;
  }
  friend bool operator<(const SystemState& a, const SystemState& b) {
    return a.values < b.values;
  }
};

struct SystemStateHash {
  size_t operator()(const SystemState& s) const { return AssignmentHash{}(s.values); }
};

/// Offset of an agent's slice inside a SystemState.
int agent_state_offset(const SystemDef& sys, int agent);
Sym state_value(const SystemDef& sys, const SystemState& s, int agent, int var);
std::string to_string(const SystemDef& sys, const SystemState& s);

/// Ultimately periodic computation: finite stem, non-empty loop.
struct LassoStep {
  SystemState state;
  Message message;
};
struct Lasso {
  std::vector<LassoStep> stem;
  std::vector<LassoStep> loop;
};

/// The descriptors under <.> and [.] at formula level, deduplicated
/// structurally, in first-occurrence order. Closed under formula
/// subterms, not under descriptor subterms.
std::vector<DescriptorRef> top_observations(const FormulaRef& f);

/// m |= O per the descriptor semantic table; quantifiers range over the
/// models of m's sender predicate, and nesting collapses because an inner
/// quantifier ranges over the singleton fixed by the outer one.
bool message_models(const SystemDef& sys, const Message& m, const DescriptorRef& d);

/// Observation letter: subset of the ambient obs(phi), as a bitmask.
using Letter = uint32_t;

/// The unique letter containing exactly the descriptors m satisfies.
Letter letter_of(const SystemDef& sys, const Message& m,
                 const std::vector<DescriptorRef>& obs);

/// True iff m satisfies exactly the descriptors named by `letter`.
bool letter_models(const SystemDef& sys, const Message& m,
                   const std::vector<DescriptorRef>& obs, Letter letter);

/// Guess-and-verify witness search for letter emptiness: selects a
/// channel, sender and data assignment, a subset of quantified atoms, and
/// one CV assignment per chosen existential; returns the first witness
/// message in enumeration order, or nullopt when the letter is empty.
std::optional<Message> letter_satisfiable(const SystemDef& sys,
                                          const std::vector<DescriptorRef>& obs,
                                          Letter letter);

/// Semantic evaluation of a formula on an ultimately periodic
/// computation, by fixpoint iteration over the unrolled loop. This is the
/// reference evaluator the automata pipeline is checked against.
bool eval_formula(const SystemDef& sys, const FormulaRef& f, const Lasso& lasso);

}  // namespace recipe
