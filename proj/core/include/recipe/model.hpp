#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recipe/assertion.hpp"
#include "recipe/symbols.hpp"

namespace recipe {

struct VarDecl {
  std::string name;
  Sym name_sym = kNoSym;
  int domain = -1;
};

/// Total assignment of symbols to an (implicit) ordered variable list.
using Assignment = std::vector<Sym>;

struct AssignmentHash {
  size_t operator()(const Assignment& a) const {
    size_t h = 1469598103934665603ull;
    for (Sym s : a) {
      h ^= static_cast<size_t>(s) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// A ReCiPe agent: local variables, the renaming of common variables to
/// local copies, send/receive guards, send/receive transition relations
/// and the initial condition.
struct AgentDef {
  std::string name;
  Sym id = kNoSym;
  std::vector<VarDecl> vars;
  std::vector<int> relabel;  // cv index -> local var index
  AssertionRef init;
  AssertionRef send_guard;  // over (V, ch, D, CV)
  AssertionRef recv_guard;  // over (V, ch)
  AssertionRef send_rel;    // over (V, V', D, ch)
  AssertionRef recv_rel;    // over (V, V', D, ch)

  int var_index(Sym name_sym) const {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name_sym == name_sym) return static_cast<int>(i);
    return -1;
  }
};

struct SystemDef {
  std::string name;
  SymbolTable syms;
  Sym star = kNoSym;
  Sym sym_false = kNoSym, sym_true = kNoSym;
  std::vector<Sym> channels;  // position 0 is the broadcast channel
  std::vector<Domain> domains;  // position 0 is bool
  std::vector<VarDecl> common_vars;
  std::vector<VarDecl> data_vars;
  std::vector<AgentDef> agents;

  SystemDef();

  /// Domains are interned by value list so identical declarations share
  /// an index (keeps re-parsed systems structurally comparable).
  int intern_domain(const std::string& name, const std::vector<Sym>& values);

  int channel_index(Sym ch) const {
    for (size_t i = 0; i < channels.size(); ++i)
      if (channels[i] == ch) return static_cast<int>(i);
    return -1;
  }
  int agent_index(Sym id) const {
    for (size_t i = 0; i < agents.size(); ++i)
      if (agents[i].id == id) return static_cast<int>(i);
    return -1;
  }
  int common_index(Sym name_sym) const {
    for (size_t i = 0; i < common_vars.size(); ++i)
      if (common_vars[i].name_sym == name_sym) return static_cast<int>(i);
    return -1;
  }
  int data_index(Sym name_sym) const {
    for (size_t i = 0; i < data_vars.size(); ++i)
      if (data_vars[i].name_sym == name_sym) return static_cast<int>(i);
    return -1;
  }

  uint64_t space_size(const std::vector<VarDecl>& vars) const;
  uint64_t cv_space_size() const { return space_size(common_vars); }
  uint64_t data_space_size() const { return space_size(data_vars); }
  uint64_t agent_space_size(int agent) const { return space_size(agents[agent].vars); }

  /// Mixed-radix index of a CV assignment, first-declared variable most
  /// significant (matches enumeration order).
  int cv_index(std::span<const Sym> cv_values) const;
  Assignment cv_assignment(int index) const;
};

/// Streams every total assignment over `vars` exactly once, in
/// lexicographic order by declaration (first variable most significant).
class AssignmentEnumerator {
 public:
  AssignmentEnumerator(const SystemDef& sys, const std::vector<VarDecl>& vars);
  const Assignment* next();  // nullptr when exhausted

 private:
  const SystemDef& sys_;
  const std::vector<VarDecl>& vars_;
  Assignment current_;
  std::vector<int> idx_;
  bool done_ = false, first_ = true;
};

void enumerate_assignments(const SystemDef& sys, const std::vector<VarDecl>& vars,
                           const std::function<void(const Assignment&)>& fn);

/// Quantifier-free predicate over the common variables, canonicalised as
/// the set of satisfying CV assignments. Equality ignores the formula
/// rendering and compares the model set.
struct CvPredicate {
  AssertionRef formula;
  uint64_t models = 0;

  friend bool operator==(const CvPredicate& a, const CvPredicate& b) {
    return a.models == b.models;
  }
};

CvPredicate make_cv_predicate(const SystemDef& sys, AssertionRef formula);

/// True iff some CV assignment satisfies `pi`.
bool satisfiable_cv(const SystemDef& sys, const AssertionRef& pi);
/// Exactly the satisfying CV assignments, in enumeration order.
std::vector<Assignment> models_of_cv(const SystemDef& sys, const AssertionRef& pi);

/// An observation: channel, data assignment, sender identity and the
/// sender predicate over common variables identifying intended receivers.
struct Message {
  Sym channel = kNoSym;
  Assignment data;
  Sym sender = kNoSym;
  CvPredicate pred;

  friend bool operator==(const Message& a, const Message& b) {
    return a.channel == b.channel && a.sender == b.sender && a.data == b.data &&
           a.pred == b.pred;
  }
  friend bool operator<(const Message& a, const Message& b) {
    if (a.channel != b.channel) return a.channel < b.channel;
    if (a.sender != b.sender) return a.sender < b.sender;
    if (a.data != b.data) return a.data < b.data;
    return a.pred.models < b.pred.models;
  }
};

std::string to_string(const SystemDef& sys, const Message& m);

/// Load-time validation: name uniqueness, declaredness, domain
/// compatibility of comparisons, g_r(star) = true in every state, and
/// broadcast input-enabledness of every receive relation (checked by
/// exhaustive enumeration; the message names the offending valuation).
std::vector<std::string> validate_system(const SystemDef& sys);

/// Convenience: validate and throw Error on the first problem.
void validate_system_or_throw(const SystemDef& sys);

}  // namespace recipe
