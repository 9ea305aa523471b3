#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "recipe/cts.hpp"
#include "recipe/ltol.hpp"
#include "recipe/model.hpp"

namespace recipe {

struct TraceStep {
  SystemState state;
  Message message;
};

class DeadEndError : public Error {
 public:
  DeadEndError(std::string what, SystemState state, int step)
      : Error(std::move(what)), state(std::move(state)), step(step) {}
  SystemState state;
  int step;
};

/// Discrete-system view of a ReCiPe system: evaluates the global
/// transition relation directly from the agent assertions. Successor
/// computation is a pure function of (system, state); internal caches are
/// guarded so concurrent callers see the same deterministic results.
class SymbolicSystem {
 public:
  explicit SymbolicSystem(const SystemDef& sys);

  const SystemDef& system() const { return sys_; }

  /// All product states satisfying every agent's initial condition.
  std::vector<SystemState> initial_states() const;

  /// All (message, successor) pairs from `s`: some agent sends, and every
  /// other agent either receives (connected and satisfying the predicate),
  /// idles disconnected, or idles on a broadcast it does not satisfy.
  std::vector<std::pair<Message, SystemState>> successors(const SystemState& s) const;

  /// Reproducible trace prefix: the seeded policy resolves the
  /// nondeterministic choice among successors. Throws DeadEndError when a
  /// state has no successor before `steps` steps were taken.
  std::vector<TraceStep> trace(const SystemState& s0, uint64_t seed, int steps) const;

  Sym agent_value(const SystemState& s, int agent, int var) const {
    return s.values[offsets_[agent] + var];
  }

 private:
  struct SendCandidate {
    Sym channel;
    Assignment data;
    Assignment next;
    CvPredicate pred;
  };

  const std::vector<SendCandidate>& send_candidates(int agent, const Assignment& local) const;
  const std::vector<Assignment>& recv_options(int agent, const Assignment& local, Sym ch,
                                              const Assignment& data) const;

  const SystemDef& sys_;
  std::vector<int> offsets_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Assignment, std::vector<SendCandidate>, AssignmentHash>
      send_cache_[64];
  mutable std::unordered_map<Assignment, std::vector<Assignment>, AssignmentHash>
      recv_cache_[64];
};

std::vector<SystemState> initial_states(const SystemDef& sys);
std::vector<std::pair<Message, SystemState>> successors(const SystemDef& sys,
                                                        const SystemState& s);
std::vector<TraceStep> trace_stream(const SystemDef& sys, const SystemState& s0, uint64_t seed,
                                    int steps);

/// One divergence between the two semantics, with enough context to
/// reproduce it.
struct Divergence {
  SystemState state;
  std::string detail;
};

struct FullAbstractionReport {
  bool equivalent = false;
  size_t states_checked = 0;
  size_t transitions_checked = 0;
  std::vector<Divergence> divergences;
  std::vector<std::string> notes;
};

/// Cross-checks the two semantics against an arbitrary CTS claimed to be
/// the system composition: initial sets must coincide and, at every state
/// reachable through the symbolic relation, the send-labelled transitions
/// must match the symbolic successors exactly.
FullAbstractionReport compare_send_semantics(const SystemDef& sys, const CtsView& cts,
                                             size_t max_states = 1u << 22);

/// Builds the composed CTS of all agents and cross-checks it against the
/// discrete-system relation (both directions of the coincidence theorem).
FullAbstractionReport full_abstraction_check(const SystemDef& sys, size_t max_states = 1u << 22);

}  // namespace recipe
