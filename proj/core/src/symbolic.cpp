#include "recipe/symbolic.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <sstream>

namespace recipe {

SymbolicSystem::SymbolicSystem(const SystemDef& sys) : sys_(sys) {
  if (sys.agents.size() > 64) throw Error("too many agents");
  offsets_.resize(sys.agents.size());
  int off = 0;
  for (size_t i = 0; i < sys.agents.size(); ++i) {
    offsets_[i] = off;
    off += static_cast<int>(sys.agents[i].vars.size());
  }
}

std::vector<SystemState> SymbolicSystem::initial_states() const {
  // Per-agent models of theta_i, then their product in declaration order.
  std::vector<std::vector<Assignment>> models(sys_.agents.size());
  for (size_t a = 0; a < sys_.agents.size(); ++a) {
    Env env;
    AssignmentEnumerator en(sys_, sys_.agents[a].vars);
    while (const Assignment* s = en.next()) {
      env.cur = s->data();
      if (eval(sys_, sys_.agents[a].init, env)) models[a].push_back(*s);
    }
    if (models[a].empty()) return {};
  }
  std::vector<SystemState> out;
  std::vector<size_t> idx(sys_.agents.size(), 0);
  for (;;) {
    SystemState s;
    for (size_t a = 0; a < sys_.agents.size(); ++a)
      s.values.insert(s.values.end(), models[a][idx[a]].begin(), models[a][idx[a]].end());
    out.push_back(std::move(s));
    int p = static_cast<int>(sys_.agents.size()) - 1;
    while (p >= 0 && ++idx[p] == models[p].size()) idx[p--] = 0;
    if (p < 0) break;
  }
  return out;
}

const std::vector<SymbolicSystem::SendCandidate>& SymbolicSystem::send_candidates(
    int agent, const Assignment& local) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = send_cache_[agent].find(local);
  if (it != send_cache_[agent].end()) return it->second;

  const AgentDef& ag = sys_.agents[agent];
  std::vector<SendCandidate> out;
  Env env;
  env.cur = local.data();
  for (Sym ch : sys_.channels) {
    env.channel = ch;
    AssignmentEnumerator de(sys_, sys_.data_vars);
    while (const Assignment* d = de.next()) {
      env.data = d->data();
      AssertionRef resid = partial_eval(sys_, ag.send_rel, env);
      if (resid->kind == AKind::False) continue;
      CvPredicate pred = make_cv_predicate(sys_, partial_eval(sys_, ag.send_guard, env));
      AssignmentEnumerator ne(sys_, ag.vars);
      while (const Assignment* nx = ne.next()) {
        Env e2 = env;
        e2.next = nx->data();
        if (!eval(sys_, resid, e2)) continue;
        out.push_back({ch, *d, *nx, pred});
      }
    }
  }
  return send_cache_[agent].emplace(local, std::move(out)).first->second;
}

const std::vector<Assignment>& SymbolicSystem::recv_options(int agent, const Assignment& local,
                                                            Sym ch, const Assignment& data) const {
  Assignment key = local;
  key.push_back(ch);
  key.insert(key.end(), data.begin(), data.end());
  std::lock_guard<std::mutex> lock(mu_);
  auto it = recv_cache_[agent].find(key);
  if (it != recv_cache_[agent].end()) return it->second;

  const AgentDef& ag = sys_.agents[agent];
  std::vector<Assignment> out;
  Env env;
  env.cur = local.data();
  env.channel = ch;
  env.data = data.data();
  AssertionRef resid = partial_eval(sys_, ag.recv_rel, env);
  if (resid->kind != AKind::False) {
    AssignmentEnumerator ne(sys_, ag.vars);
    while (const Assignment* nx = ne.next()) {
      Env e2 = env;
      e2.next = nx->data();
      if (eval(sys_, resid, e2)) out.push_back(*nx);
    }
  }
  return recv_cache_[agent].emplace(std::move(key), std::move(out)).first->second;
}

std::vector<std::pair<Message, SystemState>> SymbolicSystem::successors(
    const SystemState& s) const {
  const size_t n = sys_.agents.size();
  std::vector<Assignment> locals(n);
  for (size_t a = 0; a < n; ++a) {
    locals[a].assign(s.values.begin() + offsets_[a],
                     s.values.begin() + offsets_[a] + sys_.agents[a].vars.size());
  }
  // Each agent's view of the common variables, as a CV-space index.
  std::vector<int> cv_idx(n, 0);
  if (!sys_.common_vars.empty()) {
    Assignment cv(sys_.common_vars.size());
    for (size_t a = 0; a < n; ++a) {
      for (size_t i = 0; i < sys_.common_vars.size(); ++i)
        cv[i] = locals[a][sys_.agents[a].relabel[i]];
      cv_idx[a] = sys_.cv_index(cv);
    }
  }

  std::vector<std::pair<Message, SystemState>> out;
  for (size_t k = 0; k < n; ++k) {
    for (const SendCandidate& cand : send_candidates(static_cast<int>(k), locals[k])) {
      // Options per receiver: exactly one branch of the transition
      // relation applies to each other agent.
      std::vector<const std::vector<Assignment>*> opts(n, nullptr);
      std::vector<Assignment> stay(n);
      bool blocked = false;
      for (size_t j = 0; j < n && !blocked; ++j) {
        if (j == k) continue;
        Env env;
        env.cur = locals[j].data();
        env.channel = cand.channel;
        bool connected = eval(sys_, sys_.agents[j].recv_guard, env);
        bool satisfies = (cand.pred.models >> cv_idx[j]) & 1;
        if (connected && satisfies) {
          const auto& options =
              recv_options(static_cast<int>(j), locals[j], cand.channel, cand.data);
          if (options.empty()) blocked = true;
          else opts[j] = &options;
        } else if (!connected) {
          stay[j] = locals[j];
        } else if (cand.channel == sys_.star) {
          stay[j] = locals[j];  // broadcast, predicate unsatisfied: idle
        } else {
          blocked = true;  // connected multicast receiver that cannot take part
        }
      }
      if (blocked) continue;

      Message msg;
      msg.channel = cand.channel;
      msg.data = cand.data;
      msg.sender = sys_.agents[k].id;
      msg.pred = cand.pred;

      // Cartesian product over the receivers' options.
      std::vector<size_t> pick(n, 0);
      for (;;) {
        SystemState nx;
        nx.values.reserve(s.values.size());
        for (size_t j = 0; j < n; ++j) {
          const Assignment& part = (j == k) ? cand.next : (opts[j] ? (*opts[j])[pick[j]] : stay[j]);
          nx.values.insert(nx.values.end(), part.begin(), part.end());
        }
        out.emplace_back(msg, std::move(nx));
        int p = static_cast<int>(n) - 1;
        while (p >= 0) {
          if (static_cast<size_t>(p) != k && opts[p] && ++pick[p] < opts[p]->size()) break;
          pick[p--] = 0;
        }
        if (p < 0) break;
      }
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

std::vector<TraceStep> SymbolicSystem::trace(const SystemState& s0, uint64_t seed,
                                             int steps) const {
  std::vector<TraceStep> out;
  std::mt19937_64 rng(seed);
  SystemState cur = s0;
  for (int i = 0; i < steps; ++i) {
    auto succ = successors(cur);
    if (succ.empty())
      throw DeadEndError("dead end: no send transition enabled at step " + std::to_string(i),
                         cur, i);
    size_t pick = std::uniform_int_distribution<size_t>(0, succ.size() - 1)(rng);
    out.push_back({cur, succ[pick].first});
    cur = succ[pick].second;
  }
  return out;
}

std::vector<SystemState> initial_states(const SystemDef& sys) {
  return SymbolicSystem(sys).initial_states();
}

std::vector<std::pair<Message, SystemState>> successors(const SystemDef& sys,
                                                        const SystemState& s) {
  return SymbolicSystem(sys).successors(s);
}

std::vector<TraceStep> trace_stream(const SystemDef& sys, const SystemState& s0, uint64_t seed,
                                    int steps) {
  return SymbolicSystem(sys).trace(s0, seed, steps);
}

namespace {

std::string label_text(const SystemDef& sys, const Message& m) {
  return to_string(sys, m);
}

}  // namespace

FullAbstractionReport compare_send_semantics(const SystemDef& sys, const CtsView& cts,
                                             size_t max_states) {
  FullAbstractionReport rep;
  SymbolicSystem sym(sys);

  // Initial sets must coincide.
  std::set<Assignment> cts_init;
  for (auto& s : cts.initial_states()) cts_init.insert(s);
  std::set<Assignment> sym_init;
  for (auto& s : sym.initial_states()) sym_init.insert(s.values);
  if (cts_init != sym_init) {
    for (const auto& s : sym_init)
      if (!cts_init.count(s))
        rep.divergences.push_back({SystemState{s}, "initial in the discrete system only"});
    for (const auto& s : cts_init)
      if (!sym_init.count(s))
        rep.divergences.push_back({SystemState{s}, "initial in the composed CTS only"});
  }

  // Walk the states reachable through the symbolic relation and compare
  // the labelled send successors on both sides. Equality at every visited
  // state means both sides reach exactly the same frontier.
  std::set<Assignment> seen;
  std::deque<SystemState> queue;
  for (const auto& s : sym.initial_states())
    if (seen.insert(s.values).second) queue.push_back(s);

  while (!queue.empty() && rep.divergences.size() < 10) {
    SystemState s = std::move(queue.front());
    queue.pop_front();
    ++rep.states_checked;

    auto sym_succ = sym.successors(s);
    std::set<std::pair<Message, Assignment>> sym_set;
    for (auto& [m, nx] : sym_succ) sym_set.emplace(m, nx.values);

    std::set<std::pair<Message, Assignment>> cts_set;
    for (auto& [label, nx] : cts.successors(s.values)) {
      if (!label.send) continue;
      cts_set.emplace(to_message(label), nx);
    }

    rep.transitions_checked += sym_set.size();
    if (sym_set != cts_set) {
      for (const auto& t : sym_set)
        if (!cts_set.count(t)) {
          rep.divergences.push_back(
              {s, "discrete system allows " + label_text(sys, t.first) +
                      " but the composed CTS does not"});
          break;
        }
      for (const auto& t : cts_set)
        if (!sym_set.count(t)) {
          rep.divergences.push_back(
              {s, "composed CTS allows " + label_text(sys, t.first) +
                      " but the discrete system does not"});
          break;
        }
    }

    if (sym_succ.empty())
      rep.notes.push_back("dead end (maximality violation) at " + to_string(sys, s));

    for (auto& [m, nx] : sym_succ) {
      if (seen.count(nx.values)) continue;
      if (seen.size() >= max_states) throw Error("state bound exceeded in equivalence check");
      seen.insert(nx.values);
      queue.push_back(nx);
    }
  }

  rep.equivalent = rep.divergences.empty();
  return rep;
}

FullAbstractionReport full_abstraction_check(const SystemDef& sys, size_t max_states) {
  CtsPtr composed = compose_system(sys);
  return compare_send_semantics(sys, *composed, max_states);
}

}  // namespace recipe
