#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "recipe/ltol.hpp"
#include "recipe/model.hpp"

namespace recipe {

/// Transition label: an observation (data, sender, predicate) tagged with
/// a direction and the channel it travels on.
struct TransLabel {
  Assignment data;
  Sym sender = kNoSym;
  CvPredicate pred;
  bool send = true;
  Sym channel = kNoSym;

  /// The Upsilon+ part (everything except direction and channel).
  friend bool same_upsilon(const TransLabel& a, const TransLabel& b) {
    return a.sender == b.sender && a.pred == b.pred && a.data == b.data;
  }
  friend bool operator==(const TransLabel& a, const TransLabel& b) {
    return a.send == b.send && a.channel == b.channel && same_upsilon(a, b);
  }
  friend bool operator<(const TransLabel& a, const TransLabel& b) {
    if (a.send != b.send) return a.send > b.send;  // sends order first
    if (a.channel != b.channel) return a.channel < b.channel;
    if (a.sender != b.sender) return a.sender < b.sender;
    if (a.data != b.data) return a.data < b.data;
    return a.pred.models < b.pred.models;
  }
};

Message to_message(const TransLabel& l);
std::string to_string(const SystemDef& sys, const TransLabel& l);

/// A channelled transition system over flat symbol-vector states. Both
/// materialized systems and lazy composition views implement this
/// interface; states are just spans of symbols, so states of a pairwise
/// composition concatenate the component states.
class CtsView {
 public:
  virtual ~CtsView() = default;
  virtual int state_width() const = 0;
  virtual std::vector<Assignment> initial_states() const = 0;
  /// Outgoing transitions, sorted by (label, target).
  virtual std::vector<std::pair<TransLabel, Assignment>> successors(
      std::span<const Sym> state) const = 0;
  virtual bool listening(std::span<const Sym> state, Sym channel) const = 0;
  virtual std::string state_name(const SystemDef& sys, std::span<const Sym> state) const = 0;
};

using CtsPtr = std::shared_ptr<const CtsView>;

/// Materialized CTS with an explicit state table and adjacency lists.
class ExplicitCts : public CtsView {
 public:
  int state_width() const override { return width_; }
  std::vector<Assignment> initial_states() const override;
  std::vector<std::pair<TransLabel, Assignment>> successors(
      std::span<const Sym> state) const override;
  bool listening(std::span<const Sym> state, Sym channel) const override;
  std::string state_name(const SystemDef& sys, std::span<const Sym> state) const override;

  int num_states() const { return static_cast<int>(states_.size()); }
  size_t num_transitions() const;
  const Assignment& state(int id) const { return states_[id]; }
  const std::vector<int>& initial_ids() const { return initial_; }
  const std::vector<std::pair<TransLabel, int>>& out(int id) const { return adj_[id]; }
  int state_id(std::span<const Sym> state) const;

  /// States with no outgoing transition (maximal-path violations).
  std::vector<int> dead_ends() const;

 private:
  friend class CtsBuilder;
  int width_ = 0;
  std::vector<Assignment> states_;
  std::unordered_map<Assignment, int, AssignmentHash> index_;
  std::vector<int> initial_;
  std::vector<std::vector<std::pair<TransLabel, int>>> adj_;
  std::vector<uint64_t> listen_;  // channel bitmask per state
  std::vector<std::string> names_;
  std::vector<Sym> channels_;
};

/// Incremental construction of an ExplicitCts (also usable from tests to
/// build arbitrary transition systems).
class CtsBuilder {
 public:
  CtsBuilder(int width, std::vector<Sym> channels);
  /// Adds or finds a state; the listen mask indexes into the channel list.
  int add_state(const Assignment& s, uint64_t listen_mask, std::string name = {});
  void mark_initial(int id);
  void add_transition(int src, TransLabel label, int dst);
  void sort_adjacency();
  std::shared_ptr<ExplicitCts> take();

 private:
  std::shared_ptr<ExplicitCts> cts_;
};

/// The sender-guard instantiations of the whole system: every predicate
/// obtainable from some g_s by fixing a sender state, channel and data
/// assignment. Receive transitions range over exactly this set.
std::vector<CvPredicate> sender_predicates(const SystemDef& sys);

/// The open CTS of one agent: states are all local assignments, send
/// transitions follow the send relation with the instantiated guard as
/// predicate, receive transitions exist for every other sender identity
/// and every system predicate the state satisfies.
std::shared_ptr<const ExplicitCts> agent_to_cts(const SystemDef& sys, int agent,
                                                const std::vector<CvPredicate>* pi_set = nullptr);

/// Parallel composition with reconfigurable broadcast and multicast
/// semantics. The view is lazy: successors of a pair state are derived
/// from the component successors. `star` names the broadcast channel of
/// the shared vocabulary.
CtsPtr compose(CtsPtr lhs, CtsPtr rhs, Sym star);

/// Left-fold composition of every agent's CTS.
CtsPtr compose_system(const SystemDef& sys);

/// Restriction to send-labelled transitions, reinterpreted as messages.
CtsPtr closed_send_graph(CtsPtr inner);

/// BFS from the initial states following all transitions; deterministic
/// order. Materializes the reachable part of any view.
std::shared_ptr<const ExplicitCts> materialize_reachable(const SystemDef& sys, const CtsView& view,
                                                         size_t max_states = 1u << 22);

std::string to_dot(const SystemDef& sys, const ExplicitCts& cts, const std::string& name = "cts");

}  // namespace recipe
