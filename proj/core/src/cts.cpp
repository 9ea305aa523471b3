#include "recipe/cts.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace recipe {

Message to_message(const TransLabel& l) {
  Message m;
  m.channel = l.channel;
  m.data = l.data;
  m.sender = l.sender;
  m.pred = l.pred;
  return m;
}

std::string to_string(const SystemDef& sys, const TransLabel& l) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < l.data.size(); ++i) {
    if (i) os << ",";
    os << sys.data_vars[i].name << "=" << sys.syms.name(l.data[i]);
  }
  os << "}," << sys.syms.name(l.sender) << "," << to_string(sys, l.pred.formula) << ","
     << (l.send ? "!" : "?") << "," << sys.syms.name(l.channel);
  return os.str();
}

// ---------------------------------------------------------------------
// ExplicitCts
// ---------------------------------------------------------------------

std::vector<Assignment> ExplicitCts::initial_states() const {
  std::vector<Assignment> out;
  for (int id : initial_) out.push_back(states_[id]);
  return out;
}

int ExplicitCts::state_id(std::span<const Sym> state) const {
  Assignment key(state.begin(), state.end());
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::pair<TransLabel, Assignment>> ExplicitCts::successors(
    std::span<const Sym> state) const {
  std::vector<std::pair<TransLabel, Assignment>> out;
  int id = state_id(state);
  if (id < 0) return out;
  for (const auto& [label, target] : adj_[id]) out.emplace_back(label, states_[target]);
  return out;
}

bool ExplicitCts::listening(std::span<const Sym> state, Sym channel) const {
  int id = state_id(state);
  if (id < 0) return false;
  for (size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i] == channel) return (listen_[id] >> i) & 1;
  return false;
}

std::string ExplicitCts::state_name(const SystemDef& sys, std::span<const Sym> state) const {
  int id = state_id(state);
  if (id >= 0 && id < static_cast<int>(names_.size()) && !names_[id].empty()) return names_[id];
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < state.size(); ++i) os << (i ? " " : "") << sys.syms.name(state[i]);
  os << ")";
  return os.str();
}

size_t ExplicitCts::num_transitions() const {
  size_t n = 0;
  for (const auto& a : adj_) n += a.size();
  return n;
}

std::vector<int> ExplicitCts::dead_ends() const {
  std::vector<int> out;
  for (int i = 0; i < num_states(); ++i)
    if (adj_[i].empty()) out.push_back(i);
  return out;
}

CtsBuilder::CtsBuilder(int width, std::vector<Sym> channels) {
  cts_ = std::make_shared<ExplicitCts>();
  cts_->width_ = width;
  cts_->channels_ = std::move(channels);
}

int CtsBuilder::add_state(const Assignment& s, uint64_t listen_mask, std::string name) {
  auto it = cts_->index_.find(s);
  if (it != cts_->index_.end()) return it->second;
  int id = static_cast<int>(cts_->states_.size());
  cts_->states_.push_back(s);
  cts_->index_.emplace(s, id);
  cts_->adj_.emplace_back();
  cts_->listen_.push_back(listen_mask);
  cts_->names_.push_back(std::move(name));
  return id;
}

void CtsBuilder::mark_initial(int id) { cts_->initial_.push_back(id); }

void CtsBuilder::add_transition(int src, TransLabel label, int dst) {
  cts_->adj_[src].emplace_back(std::move(label), dst);
}

void CtsBuilder::sort_adjacency() {
  for (auto& lst : cts_->adj_) {
    std::sort(lst.begin(), lst.end(), [this](const auto& a, const auto& b) {
      if (!(a.first == b.first)) return a.first < b.first;
      return cts_->states_[a.second] < cts_->states_[b.second];
    });
    lst.erase(std::unique(lst.begin(), lst.end(),
                          [](const auto& a, const auto& b) {
                            return a.first == b.first && a.second == b.second;
                          }),
              lst.end());
  }
}

std::shared_ptr<ExplicitCts> CtsBuilder::take() { return std::move(cts_); }

namespace {

uint64_t listen_mask_of(const SystemDef& sys, const AgentDef& ag, const Assignment& s) {
  Env env;
  env.cur = s.data();
  uint64_t mask = 0;
  for (size_t c = 0; c < sys.channels.size(); ++c) {
    env.channel = sys.channels[c];
    if (eval(sys, ag.recv_guard, env)) mask |= 1ull << c;
  }
  return mask;
}

std::string agent_state_name(const SystemDef& sys, const AgentDef& ag, const Assignment& s) {
  std::ostringstream os;
  for (size_t i = 0; i < ag.vars.size(); ++i)
    os << (i ? " " : "") << ag.vars[i].name << "=" << sys.syms.name(s[i]);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------
// Sender predicates and the agent CTS
// ---------------------------------------------------------------------

std::vector<CvPredicate> sender_predicates(const SystemDef& sys) {
  std::vector<CvPredicate> out;
  std::map<uint64_t, size_t> seen;
  for (const AgentDef& ag : sys.agents) {
    AssignmentEnumerator se(sys, ag.vars);
    while (const Assignment* s = se.next()) {
      for (Sym ch : sys.channels) {
        AssignmentEnumerator de(sys, sys.data_vars);
        while (const Assignment* d = de.next()) {
          Env env;
          env.cur = s->data();
          env.channel = ch;
          env.data = d->data();
          CvPredicate p = make_cv_predicate(sys, partial_eval(sys, ag.send_guard, env));
          if (seen.emplace(p.models, out.size()).second) out.push_back(std::move(p));
        }
      }
    }
  }
  return out;
}

std::shared_ptr<const ExplicitCts> agent_to_cts(const SystemDef& sys, int agent,
                                                const std::vector<CvPredicate>* pi_set) {
  const AgentDef& ag = sys.agents[agent];
  std::vector<CvPredicate> local_pi;
  if (!pi_set) {
    local_pi = sender_predicates(sys);
    pi_set = &local_pi;
  }

  CtsBuilder b(static_cast<int>(ag.vars.size()), sys.channels);

  // States are all local assignments; initial states are the models of
  // the initial condition.
  std::vector<Assignment> states;
  {
    AssignmentEnumerator se(sys, ag.vars);
    while (const Assignment* s = se.next()) states.push_back(*s);
  }
  bool with_names = states.size() <= 20000;
  for (const Assignment& s : states) {
    int id = b.add_state(s, listen_mask_of(sys, ag, s),
                         with_names ? agent_state_name(sys, ag, s) : std::string());
    Env env;
    env.cur = s.data();
    if (eval(sys, ag.init, env)) b.mark_initial(id);
  }

  for (const Assignment& s : states) {
    int src = 0;
    {
      Assignment key = s;
      src = b.add_state(key, 0);  // already present
    }
    Env base;
    base.cur = s.data();
    uint64_t lmask = listen_mask_of(sys, ag, s);
    Assignment cv_img(sys.common_vars.size());
    for (size_t cv = 0; cv < sys.common_vars.size(); ++cv) cv_img[cv] = s[ag.relabel[cv]];
    int cv_idx = sys.common_vars.empty() ? 0 : sys.cv_index(cv_img);

    for (size_t ci = 0; ci < sys.channels.size(); ++ci) {
      Sym ch = sys.channels[ci];
      AssignmentEnumerator de(sys, sys.data_vars);
      while (const Assignment* d = de.next()) {
        Env env = base;
        env.channel = ch;
        env.data = d->data();

        // Send transitions: T_s(s, s', d, ch) with the instantiated guard
        // as the message predicate.
        AssertionRef send_resid = partial_eval(sys, ag.send_rel, env);
        if (send_resid->kind != AKind::False) {
          CvPredicate pi = make_cv_predicate(sys, partial_eval(sys, ag.send_guard, env));
          // Use the canonical representative so labels compare bitwise.
          for (const CvPredicate& rep : *pi_set)
            if (rep.models == pi.models) {
              pi = rep;
              break;
            }
          for (const Assignment& nx : states) {
            Env e2 = env;
            e2.next = nx.data();
            if (!eval(sys, send_resid, e2)) continue;
            TransLabel l;
            l.data = *d;
            l.sender = ag.id;
            l.pred = pi;
            l.send = true;
            l.channel = ch;
            b.add_transition(src, std::move(l), b.add_state(nx, 0));
          }
        }

        // Receive transitions: only on listened channels, for every other
        // sender identity and every system predicate this state satisfies.
        if (!((lmask >> ci) & 1)) continue;
        AssertionRef recv_resid = partial_eval(sys, ag.recv_rel, env);
        if (recv_resid->kind == AKind::False) continue;
        for (const Assignment& nx : states) {
          Env e2 = env;
          e2.next = nx.data();
          if (!eval(sys, recv_resid, e2)) continue;
          int dst = b.add_state(nx, 0);
          for (const AgentDef& other : sys.agents) {
            if (other.id == ag.id) continue;
            for (const CvPredicate& pi : *pi_set) {
              if (!((pi.models >> cv_idx) & 1)) continue;
              TransLabel l;
              l.data = *d;
              l.sender = other.id;
              l.pred = pi;
              l.send = false;
              l.channel = ch;
              b.add_transition(src, std::move(l), dst);
            }
          }
        }
      }
    }
  }
  b.sort_adjacency();
  return b.take();
}

// ---------------------------------------------------------------------
// Parallel composition (lazy view)
// ---------------------------------------------------------------------

namespace {

class ComposedCts : public CtsView {
 public:
  ComposedCts(CtsPtr lhs, CtsPtr rhs, Sym star)
      : lhs_(std::move(lhs)), rhs_(std::move(rhs)), star_(star) {
    lw_ = lhs_->state_width();
    rw_ = rhs_->state_width();
  }

  int state_width() const override { return lw_ + rw_; }

  std::vector<Assignment> initial_states() const override {
    std::vector<Assignment> out;
    for (const Assignment& a : lhs_->initial_states())
      for (const Assignment& b : rhs_->initial_states()) {
        Assignment s = a;
        s.insert(s.end(), b.begin(), b.end());
        out.push_back(std::move(s));
      }
    return out;
  }

  bool listening(std::span<const Sym> state, Sym channel) const override {
    return lhs_->listening(state.subspan(0, lw_), channel) ||
           rhs_->listening(state.subspan(lw_), channel);
  }

  std::string state_name(const SystemDef& sys, std::span<const Sym> state) const override {
    return lhs_->state_name(sys, state.subspan(0, lw_)) + " | " +
           rhs_->state_name(sys, state.subspan(lw_));
  }

  std::vector<std::pair<TransLabel, Assignment>> successors(
      std::span<const Sym> state) const override {
    auto s1 = state.subspan(0, lw_);
    auto s2 = state.subspan(lw_);
    auto out1 = lhs_->successors(s1);
    auto out2 = rhs_->successors(s2);

    std::vector<std::pair<TransLabel, Assignment>> out;
    auto emit = [&](const TransLabel& l, std::span<const Sym> n1, std::span<const Sym> n2) {
      Assignment s(n1.begin(), n1.end());
      s.insert(s.end(), n2.begin(), n2.end());
      out.emplace_back(l, std::move(s));
    };
    auto has_star_recv = [](const std::vector<std::pair<TransLabel, Assignment>>& outs,
                            const TransLabel& l, Sym star) {
      for (const auto& [t, n] : outs)
        if (!t.send && t.channel == star && same_upsilon(t, l)) return true;
      return false;
    };
    const Sym star = star_;

    for (const auto& [t1, n1] : out1) {
      if (t1.send) {
        // (!) pairs with a matching (?) on the same channel.
        for (const auto& [t2, n2] : out2)
          if (!t2.send && t2.channel == t1.channel && same_upsilon(t1, t2)) emit(t1, n1, n2);
        // The other side does not listen on the channel: it discards.
        if (!rhs_->listening(s2, t1.channel)) emit(t1, n1, s2);
        // Broadcast proceeds when the other side has no matching receive.
        if (t1.channel == star && !has_star_recv(out2, t1, star)) emit(t1, n1, s2);
      } else {
        // (?) pairs with a matching (?): joint receive.
        for (const auto& [t2, n2] : out2)
          if (!t2.send && t2.channel == t1.channel && same_upsilon(t1, t2)) emit(t1, n1, n2);
        if (!rhs_->listening(s2, t1.channel)) emit(t1, n1, s2);
        if (t1.channel == star && !has_star_recv(out2, t1, star)) emit(t1, n1, s2);
      }
    }
    for (const auto& [t2, n2] : out2) {
      if (t2.send) {
        for (const auto& [t1, n1] : out1)
          if (!t1.send && t1.channel == t2.channel && same_upsilon(t1, t2)) emit(t2, n1, n2);
        if (!lhs_->listening(s1, t2.channel)) emit(t2, s1, n2);
        if (t2.channel == star && !has_star_recv(out1, t2, star)) emit(t2, s1, n2);
      } else {
        if (!lhs_->listening(s1, t2.channel)) emit(t2, s1, n2);
        if (t2.channel == star && !has_star_recv(out1, t2, star)) emit(t2, s1, n2);
      }
    }

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (!(a.first == b.first)) return a.first < b.first;
      return a.second < b.second;
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const auto& a, const auto& b) {
                            return a.first == b.first && a.second == b.second;
                          }),
              out.end());
    return out;
  }

 private:
  CtsPtr lhs_, rhs_;
  int lw_ = 0, rw_ = 0;
  Sym star_ = kNoSym;
};

}  // namespace

CtsPtr compose(CtsPtr lhs, CtsPtr rhs, Sym star) {
  return std::make_shared<ComposedCts>(std::move(lhs), std::move(rhs), star);
}

CtsPtr compose_system(const SystemDef& sys) {
  auto pi = sender_predicates(sys);
  CtsPtr acc = agent_to_cts(sys, 0, &pi);
  for (size_t i = 1; i < sys.agents.size(); ++i)
    acc = compose(acc, agent_to_cts(sys, static_cast<int>(i), &pi), sys.star);
  return acc;
}

// ---------------------------------------------------------------------
// Send-graph restriction
// ---------------------------------------------------------------------

namespace {

class SendGraphView : public CtsView {
 public:
  explicit SendGraphView(CtsPtr inner) : inner_(std::move(inner)) {}
  int state_width() const override { return inner_->state_width(); }
  std::vector<Assignment> initial_states() const override { return inner_->initial_states(); }
  bool listening(std::span<const Sym> s, Sym c) const override { return inner_->listening(s, c); }
  std::string state_name(const SystemDef& sys, std::span<const Sym> s) const override {
    return inner_->state_name(sys, s);
  }
  std::vector<std::pair<TransLabel, Assignment>> successors(
      std::span<const Sym> s) const override {
    auto all = inner_->successors(s);
    std::vector<std::pair<TransLabel, Assignment>> out;
    for (auto& t : all)
      if (t.first.send) out.push_back(std::move(t));
    return out;
  }

 private:
  CtsPtr inner_;
};

}  // namespace

CtsPtr closed_send_graph(CtsPtr inner) {
  return std::make_shared<SendGraphView>(std::move(inner));
}

// ---------------------------------------------------------------------
// Reachability
// ---------------------------------------------------------------------

std::shared_ptr<const ExplicitCts> materialize_reachable(const SystemDef& sys, const CtsView& view,
                                                         size_t max_states) {
  CtsBuilder b(view.state_width(), sys.channels);
  std::deque<Assignment> queue;
  std::vector<Assignment> inits = view.initial_states();
  std::sort(inits.begin(), inits.end());

  auto listen_mask = [&](const Assignment& s) {
    uint64_t m = 0;
    for (size_t c = 0; c < sys.channels.size(); ++c)
      if (view.listening(s, sys.channels[c])) m |= 1ull << c;
    return m;
  };

  size_t named_budget = 20000;
  std::unordered_map<Assignment, int, AssignmentHash> seen;
  for (const Assignment& s : inits) {
    if (seen.count(s)) continue;
    int id = b.add_state(s, listen_mask(s),
                         seen.size() < named_budget ? view.state_name(sys, s) : std::string());
    seen.emplace(s, id);
    b.mark_initial(id);
    queue.push_back(s);
  }
  while (!queue.empty()) {
    Assignment s = std::move(queue.front());
    queue.pop_front();
    int src = seen.at(s);
    for (const auto& [label, target] : view.successors(s)) {
      auto it = seen.find(target);
      int dst;
      if (it == seen.end()) {
        if (seen.size() >= max_states)
          throw Error("state bound exceeded while exploring the composed system (" +
                      std::to_string(max_states) + " states)");
        dst = b.add_state(target, listen_mask(target),
                          seen.size() < named_budget ? view.state_name(sys, target)
                                                     : std::string());
        seen.emplace(target, dst);
        queue.push_back(target);
      } else {
        dst = it->second;
      }
      b.add_transition(src, label, dst);
    }
  }
  b.sort_adjacency();
  return b.take();
}

std::string to_dot(const SystemDef& sys, const ExplicitCts& cts, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n";
  for (int i = 0; i < cts.num_states(); ++i) {
    os << "  s" << i << " [label=\"" << cts.state_name(sys, cts.state(i)) << "\"];\n";
  }
  for (int i : cts.initial_ids()) {
    os << "  init" << i << " [shape=point];\n  init" << i << " -> s" << i << ";\n";
  }
  for (int i = 0; i < cts.num_states(); ++i)
    for (const auto& [label, dst] : cts.out(i))
      os << "  s" << i << " -> s" << dst << " [label=\"" << to_string(sys, label) << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace recipe
