#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recipe/ltol.hpp"
#include "recipe/symbolic.hpp"

namespace recipe {

/// Alternating Buechi word automaton over the joint alphabet of state
/// letters and observation letters. States are the subformulas of the
/// translated formula; transitions are positive Boolean formulas over
/// states, kept in DNF as sets of state-sets. Accepting states are the
/// Release subformulas.
class Abw {
 public:
  using Cube = uint64_t;          // a set of states
  using Dnf = std::vector<Cube>;  // minimal cubes, sorted

  struct AtomKey {
    int16_t agent, var;
    Sym value;
  };

  Abw();
  ~Abw();
  Abw(Abw&&) noexcept;
  Abw& operator=(Abw&&) noexcept;
  Abw(const Abw&) = delete;
  Abw& operator=(const Abw&) = delete;

  const std::vector<FormulaRef>& states() const { return states_; }
  int initial() const { return initial_; }
  uint64_t accepting() const { return accepting_; }
  const std::vector<DescriptorRef>& observations() const { return obs_; }
  const std::vector<AtomKey>& atoms() const { return atoms_; }
  const std::vector<std::pair<int16_t, int16_t>>& atom_vars() const { return atom_vars_; }
  const SystemDef& system() const { return *sys_; }

  /// delta(q, sigma, o), with sigma abstracted to the truth values of the
  /// formula's atoms. Memoized.
  Dnf delta(int q, uint64_t atom_mask, Letter letter) const;

  uint64_t atom_mask_of(const SystemState& s) const;
  uint64_t atom_mask_of_assignment(const std::vector<Sym>& mentioned_values) const;

 private:
  friend Abw formula_to_abw(const SystemDef& sys, const FormulaRef& f);

  const SystemDef* sys_ = nullptr;
  FormulaRef root_;
  std::vector<FormulaRef> states_;
  int initial_ = 0;
  uint64_t accepting_ = 0;
  std::vector<DescriptorRef> obs_;
  std::vector<AtomKey> atoms_;
  std::vector<std::pair<int16_t, int16_t>> atom_vars_;  // distinct (agent, var)

  struct DeltaCache;
  std::unique_ptr<DeltaCache> cache_;

  int state_index(const FormulaRef& f) const;
  Dnf delta_rec(const FormulaRef& f, uint64_t atom_mask, Letter letter) const;
};

/// Inductive translation: states are the subformula closure, the initial
/// state is the formula, accepting states are the Release subformulas.
Abw formula_to_abw(const SystemDef& sys, const FormulaRef& f);

/// Dealternation state: the obligation set and the subset still owing a
/// visit to the acceptance set since the last breakpoint.
struct MhState {
  uint64_t all = 0, owe = 0;
  friend bool operator==(const MhState& a, const MhState& b) {
    return a.all == b.all && a.owe == b.owe;
  }
  friend bool operator<(const MhState& a, const MhState& b) {
    return a.all != b.all ? a.all < b.all : a.owe < b.owe;
  }
};

/// Miyano-Hayashi subset-pair construction over an ABW, exposed as an
/// on-the-fly successor function. Language-preserving; breakpoint states
/// (owing set empty) are the Buechi acceptance set.
class Nbw {
 public:
  explicit Nbw(const Abw& abw) : abw_(&abw) {}
  const Abw& abw() const { return *abw_; }
  MhState initial() const;
  bool accepting(const MhState& s) const { return s.owe == 0; }
  std::vector<MhState> successors(const MhState& s, uint64_t atom_mask, Letter letter) const;

 private:
  const Abw* abw_;
};

/// Membership of an ultimately periodic word in the NBW language. The
/// word is given as the (state, message) lasso it abstracts.
bool nbw_accepts_lasso(const Abw& abw, const Lasso& lasso);

struct VerdictStep {
  SystemState state;
  Message message;
};

struct Verdict {
  enum class Kind { Holds, Fails, Sat, Unsat } kind;
  std::vector<VerdictStep> stem;
  std::vector<VerdictStep> loop;
  std::vector<std::string> notes;

  bool has_witness() const { return kind == Kind::Fails || kind == Kind::Sat; }
};

std::string to_string(Verdict::Kind k);

/// Satisfiability through NBW nonemptiness, following only transitions
/// whose observation letter has a model. A sat verdict carries a lasso
/// with a concrete witness message per letter.
Verdict satisfiable(const SystemDef& sys, const FormulaRef& f, size_t max_product = 1u << 22);

/// Model checking: builds the NBW of the dual formula and searches the
/// on-the-fly product with the discrete-system successors for an
/// accepting lasso (nested DFS). A fails verdict carries the concrete
/// counterexample; dead-end states are reported in the notes.
Verdict model_check(const SystemDef& sys, const FormulaRef& f, size_t max_states = 1u << 22);

std::string to_dot(const Abw& abw, const std::string& name = "abw");
std::string to_dot_nbw(const Abw& abw, const std::string& name = "nbw");

}  // namespace recipe
