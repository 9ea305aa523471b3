#include "recipe/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace recipe {

struct Abw::DeltaCache {
  std::mutex mu;
  std::map<std::tuple<int, uint64_t, Letter>, Dnf> memo;
};

Abw::Abw() : cache_(std::make_unique<DeltaCache>()) {}
Abw::~Abw() = default;
Abw::Abw(Abw&&) noexcept = default;
Abw& Abw::operator=(Abw&&) noexcept = default;

// ---------------------------------------------------------------------
// DNF over state cubes
// ---------------------------------------------------------------------

namespace {

using Cube = Abw::Cube;
using Dnf = Abw::Dnf;

bool popcount_less(Cube a, Cube b) {
  int pa = __builtin_popcountll(a), pb = __builtin_popcountll(b);
  return pa != pb ? pa < pb : a < b;
}

// Keep only minimal cubes: a cube subsuming another contributes nothing.
Dnf minimize(Dnf d) {
  std::sort(d.begin(), d.end(), popcount_less);
  Dnf out;
  for (Cube c : d) {
    bool dominated = false;
    for (Cube kept : out)
      if ((kept & c) == kept) {
        dominated = true;
        break;
      }
    if (!dominated) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dnf dnf_true() { return {0}; }
Dnf dnf_false() { return {}; }

Dnf dnf_or(const Dnf& a, const Dnf& b) {
  Dnf out = a;
  out.insert(out.end(), b.begin(), b.end());
  return minimize(std::move(out));
}

Dnf dnf_and(const Dnf& a, const Dnf& b) {
  Dnf out;
  for (Cube x : a)
    for (Cube y : b) out.push_back(x | y);
  return minimize(std::move(out));
}

}  // namespace

// ---------------------------------------------------------------------
// ABW construction
// ---------------------------------------------------------------------

namespace {

void collect_closure(const FormulaRef& f, std::vector<FormulaRef>& states) {
  for (const auto& s : states)
    if (formula_equal(s, f)) return;
  states.push_back(f);
  switch (f->kind) {
    case FKind::Or:
    case FKind::And:
    case FKind::Until:
    case FKind::Release:
      collect_closure(f->a, states);
      collect_closure(f->b, states);
      break;
    case FKind::Possible:
    case FKind::Necessary:
      collect_closure(f->a, states);
      break;
    default:
      break;
  }
}

void collect_atoms(const FormulaRef& f, std::vector<Abw::AtomKey>& atoms) {
  if (f->kind == FKind::Atom) {
    for (const auto& a : atoms)
      if (a.agent == f->agent && a.var == f->var && a.value == f->value) return;
    atoms.push_back({f->agent, f->var, f->value});
    return;
  }
  if (f->a) collect_atoms(f->a, atoms);
  if (f->b) collect_atoms(f->b, atoms);
}

}  // namespace

Abw formula_to_abw(const SystemDef& sys, const FormulaRef& f) {
  Abw a;
  a.sys_ = &sys;
  a.root_ = f;
  collect_closure(f, a.states_);
  if (a.states_.size() > 64) throw Error("formula closure exceeds 64 states");
  a.initial_ = 0;
  for (size_t i = 0; i < a.states_.size(); ++i)
    if (a.states_[i]->kind == FKind::Release) a.accepting_ |= 1ull << i;
  a.obs_ = top_observations(f);
  if (a.obs_.size() > 20) throw Error("formula has more than 20 top-level observations");
  collect_atoms(f, a.atoms_);
  for (const auto& at : a.atoms_) {
    bool seen = false;
    for (const auto& v : a.atom_vars_)
      if (v.first == at.agent && v.second == at.var) seen = true;
    if (!seen) a.atom_vars_.emplace_back(at.agent, at.var);
  }
  return a;
}

int Abw::state_index(const FormulaRef& f) const {
  for (size_t i = 0; i < states_.size(); ++i)
    if (formula_equal(states_[i], f)) return static_cast<int>(i);
  throw Error("formula not in closure");
}

uint64_t Abw::atom_mask_of(const SystemState& s) const {
  uint64_t m = 0;
  for (size_t i = 0; i < atoms_.size(); ++i)
    if (state_value(*sys_, s, atoms_[i].agent, atoms_[i].var) == atoms_[i].value)
      m |= 1ull << i;
  return m;
}

uint64_t Abw::atom_mask_of_assignment(const std::vector<Sym>& mentioned_values) const {
  uint64_t m = 0;
  for (size_t i = 0; i < atoms_.size(); ++i) {
    for (size_t v = 0; v < atom_vars_.size(); ++v)
      if (atom_vars_[v].first == atoms_[i].agent && atom_vars_[v].second == atoms_[i].var) {
        if (mentioned_values[v] == atoms_[i].value) m |= 1ull << i;
        break;
      }
  }
  return m;
}

Abw::Dnf Abw::delta_rec(const FormulaRef& f, uint64_t atom_mask, Letter letter) const {
  switch (f->kind) {
    case FKind::True:
      return dnf_true();
    case FKind::False:
      return dnf_false();
    case FKind::Atom: {
      for (size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i].agent == f->agent && atoms_[i].var == f->var &&
            atoms_[i].value == f->value) {
          bool holds = ((atom_mask >> i) & 1) != f->neq;
          return holds ? dnf_true() : dnf_false();
        }
      throw Error("atom not collected");
    }
    case FKind::Or:
      return dnf_or(delta_rec(f->a, atom_mask, letter), delta_rec(f->b, atom_mask, letter));
    case FKind::And:
      return dnf_and(delta_rec(f->a, atom_mask, letter), delta_rec(f->b, atom_mask, letter));
    case FKind::Until: {
      // delta(a U b) = delta(a) & (a U b) | delta(b)
      Dnf self = {1ull << state_index(f)};
      return dnf_or(dnf_and(delta_rec(f->a, atom_mask, letter), self),
                    delta_rec(f->b, atom_mask, letter));
    }
    case FKind::Release: {
      // delta(a R b) = (delta(a) | a R b) & delta(b)
      Dnf self = {1ull << state_index(f)};
      return dnf_and(dnf_or(delta_rec(f->a, atom_mask, letter), self),
                     delta_rec(f->b, atom_mask, letter));
    }
    case FKind::Possible: {
      int oi = -1;
      for (size_t i = 0; i < obs_.size(); ++i)
        if (descriptor_equal(obs_[i], f->obs)) oi = static_cast<int>(i);
      bool in_letter = oi >= 0 && ((letter >> oi) & 1);
      if (!in_letter) return dnf_false();
      return {1ull << state_index(f->a)};
    }
    case FKind::Necessary: {
      int oi = -1;
      for (size_t i = 0; i < obs_.size(); ++i)
        if (descriptor_equal(obs_[i], f->obs)) oi = static_cast<int>(i);
      bool in_letter = oi >= 0 && ((letter >> oi) & 1);
      if (!in_letter) return dnf_true();
      return {1ull << state_index(f->a)};
    }
  }
  throw Error("corrupt formula node");
}

Abw::Dnf Abw::delta(int q, uint64_t atom_mask, Letter letter) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto key = std::make_tuple(q, atom_mask, letter);
  auto it = cache_->memo.find(key);
  if (it != cache_->memo.end()) return it->second;
  Dnf d = delta_rec(states_[q], atom_mask, letter);
  cache_->memo.emplace(key, d);
  return d;
}

// ---------------------------------------------------------------------
// Miyano-Hayashi
// ---------------------------------------------------------------------

MhState Nbw::initial() const {
  uint64_t q0 = 1ull << abw_->initial();
  return {q0, q0 & ~abw_->accepting()};
}

std::vector<MhState> Nbw::successors(const MhState& s, uint64_t atom_mask, Letter letter) const {
  if (s.all == 0) return {MhState{0, 0}};  // all obligations discharged

  std::vector<int> qs;
  std::vector<Dnf> dnfs;
  uint64_t bits = s.all;
  size_t combos = 1;
  for (int q = 0; bits; ++q, bits >>= 1) {
    if (!(bits & 1)) continue;
    Dnf d = abw_->delta(q, atom_mask, letter);
    if (d.empty()) return {};
    combos *= d.size();
    if (combos > (1u << 20)) throw Error("dealternation choice explosion");
    qs.push_back(q);
    dnfs.push_back(std::move(d));
  }

  const uint64_t acc = abw_->accepting();
  std::set<MhState> out;
  std::vector<size_t> pick(qs.size(), 0);
  for (;;) {
    uint64_t all = 0, owe = 0;
    for (size_t i = 0; i < qs.size(); ++i) {
      all |= dnfs[i][pick[i]];
      if ((s.owe >> qs[i]) & 1) owe |= dnfs[i][pick[i]];
    }
    if (s.owe == 0) owe = all;  // breakpoint: start owing everything anew
    out.insert(MhState{all, owe & ~acc});
    int p = static_cast<int>(qs.size()) - 1;
    while (p >= 0 && ++pick[p] == dnfs[p].size()) pick[p--] = 0;
    if (p < 0) break;
  }
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------
// Nested DFS (two-colour) accepting-lasso search
// ---------------------------------------------------------------------

namespace {

// Generic accepting-lasso search on an implicitly given graph. Node and
// Edge are value types; successor order fixes the witness.
template <class Node, class Edge, class Hash>
class LassoSearch {
 public:
  using SuccFn = std::function<std::vector<std::pair<Edge, Node>>(const Node&)>;
  using AccFn = std::function<bool(const Node&)>;

  struct Result {
    std::vector<std::pair<Node, Edge>> steps;  // node and the edge taken from it
    size_t loop_start = 0;                     // steps[loop_start..] close a cycle
  };

  LassoSearch(SuccFn succ, AccFn acc) : succ_(std::move(succ)), acc_(std::move(acc)) {}

  std::optional<Result> run(const std::vector<Node>& initials) {
    for (const Node& n : initials) {
      if (blue_.count(n)) continue;
      if (auto r = blue_dfs(n)) return r;
    }
    return std::nullopt;
  }

 private:
  struct Frame {
    Node node;
    std::vector<std::pair<Edge, Node>> succs;
    size_t next = 0;
  };

  std::optional<Result> blue_dfs(const Node& root) {
    std::vector<Frame> stack;
    std::unordered_map<Node, size_t, Hash> on_stack;
    stack.push_back({root, succ_(root), 0});
    on_stack.emplace(root, 0);
    blue_.insert(root);

    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < top.succs.size()) {
        const auto& [edge, child] = top.succs[top.next++];
        if (!blue_.count(child)) {
          blue_.insert(child);
          on_stack.emplace(child, stack.size());
          stack.push_back({child, succ_(child), 0});
        }
        continue;
      }
      // Post-order: seed the red search from accepting nodes.
      if (acc_(top.node)) {
        if (auto r = red_dfs(stack, on_stack)) return r;
      }
      on_stack.erase(top.node);
      stack.pop_back();
    }
    return std::nullopt;
  }

  std::optional<Result> red_dfs(std::vector<Frame>& blue_stack,
                                std::unordered_map<Node, size_t, Hash>& on_stack) {
    const Node seed = blue_stack.back().node;
    // Iterative DFS with parent edges for path reconstruction.
    std::unordered_map<Node, std::pair<Node, Edge>, Hash> parent;
    std::vector<Node> work{seed};
    std::optional<Node> hit;
    while (!work.empty() && !hit) {
      Node n = work.back();
      work.pop_back();
      for (auto& [edge, child] : succ_(n)) {
        auto os = on_stack.find(child);
        if (os != on_stack.end()) {
          parent.emplace(child, std::make_pair(n, edge));
          hit = child;
          break;
        }
        if (red_.count(child) || parent.count(child)) continue;
        parent.emplace(child, std::make_pair(n, edge));
        work.push_back(child);
      }
      red_.insert(n);
    }
    if (!hit) return std::nullopt;

    // Cycle: stack[j..top] (blue edges) then seed -> ... -> hit (red path).
    size_t j = on_stack.at(*hit);
    Result res;
    for (size_t i = 0; i + 1 < blue_stack.size(); ++i) {
      const Frame& fr = blue_stack[i];
      // The edge currently being explored is succs[next-1].
      res.steps.emplace_back(fr.node, fr.succs[fr.next - 1].first);
    }
    // Edges from the seed back to the stack entry via red parents. The
    // do-while covers the self-loop case where hit == seed.
    std::vector<std::pair<Node, Edge>> red_path;
    Node cur = *hit;
    do {
      auto& [prev, edge] = parent.at(cur);
      red_path.emplace_back(prev, edge);
      cur = prev;
      if (red_path.size() > red_.size() + parent.size() + 1)
        throw Error("red path reconstruction failed");
    } while (!(cur == seed));
    std::reverse(red_path.begin(), red_path.end());
    res.steps.insert(res.steps.end(), red_path.begin(), red_path.end());
    res.loop_start = j;
    return res;
  }

  SuccFn succ_;
  AccFn acc_;
  std::unordered_set<Node, Hash> blue_, red_;
};

struct MhHash {
  size_t operator()(const MhState& s) const {
    return std::hash<uint64_t>()(s.all * 0x9e3779b97f4a7c15ull ^ s.owe);
  }
};

struct PairHash {
  size_t operator()(const std::pair<int, MhState>& p) const {
    return std::hash<int>()(p.first) * 1099511628211ull ^ MhHash{}(p.second);
  }
};

}  // namespace

// ---------------------------------------------------------------------
// Lasso membership
// ---------------------------------------------------------------------

bool nbw_accepts_lasso(const Abw& abw, const Lasso& lasso) {
  if (lasso.loop.empty()) throw Error("empty loop");
  const SystemDef& sys = abw.system();
  std::vector<const LassoStep*> steps;
  for (const auto& s : lasso.stem) steps.push_back(&s);
  for (const auto& s : lasso.loop) steps.push_back(&s);
  const int n = static_cast<int>(steps.size());
  const int back = static_cast<int>(lasso.stem.size());

  std::vector<uint64_t> masks(n);
  std::vector<Letter> letters(n);
  for (int i = 0; i < n; ++i) {
    masks[i] = abw.atom_mask_of(steps[i]->state);
    letters[i] = letter_of(sys, steps[i]->message, abw.observations());
  }

  Nbw nbw(abw);
  using Node = std::pair<int, MhState>;
  auto succ = [&](const Node& nd) {
    std::vector<std::pair<int, Node>> out;
    int pos = nd.first;
    int npos = pos + 1 < n ? pos + 1 : back;
    for (const MhState& q : nbw.successors(nd.second, masks[pos], letters[pos]))
      out.emplace_back(0, Node{npos, q});
    return out;
  };
  auto acc = [&](const Node& nd) { return nbw.accepting(nd.second); };
  LassoSearch<Node, int, PairHash> search(succ, acc);
  return search.run({Node{0, nbw.initial()}}).has_value();
}

// ---------------------------------------------------------------------
// Satisfiability
// ---------------------------------------------------------------------

std::string to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Holds: return "holds";
    case Verdict::Kind::Fails: return "fails";
    case Verdict::Kind::Sat: return "sat";
    case Verdict::Kind::Unsat: return "unsat";
  }
  return "?";
}

namespace {

// Default full state: first domain value everywhere, then the mentioned
// variables overridden.
SystemState default_state(const SystemDef& sys,
                          const std::vector<std::pair<int16_t, int16_t>>& vars,
                          const std::vector<Sym>& values) {
  SystemState s;
  for (const auto& ag : sys.agents)
    for (const auto& v : ag.vars) s.values.push_back(sys.domains[v.domain].values[0]);
  for (size_t i = 0; i < vars.size(); ++i) {
    int off = agent_state_offset(sys, vars[i].first);
    s.values[off + vars[i].second] = values[i];
  }
  return s;
}

}  // namespace

Verdict satisfiable(const SystemDef& sys, const FormulaRef& f, size_t max_product) {
  Abw abw = formula_to_abw(sys, f);
  Nbw nbw(abw);
  const auto& obs = abw.observations();

  // Sigma classes: assignments to the state variables the formula
  // mentions; everything else is unconstrained.
  std::vector<std::vector<Sym>> classes;
  {
    const auto& vars = abw.atom_vars();
    std::vector<Sym> vals(vars.size());
    std::vector<int> idx(vars.size(), 0);
    for (;;) {
      for (size_t i = 0; i < vars.size(); ++i) {
        const Domain& d =
            sys.domains[sys.agents[vars[i].first].vars[vars[i].second].domain];
        vals[i] = d.values[idx[i]];
      }
      classes.push_back(vals);
      int p = static_cast<int>(vars.size()) - 1;
      while (p >= 0) {
        const Domain& d =
            sys.domains[sys.agents[vars[p].first].vars[vars[p].second].domain];
        if (++idx[p] < d.size()) break;
        idx[p--] = 0;
      }
      if (p < 0) break;
    }
  }

  // Non-empty observation letters, with their first witness message.
  std::vector<std::pair<Letter, Message>> letters;
  for (Letter o = 0; o < (1u << obs.size()); ++o)
    if (auto w = letter_satisfiable(sys, obs, o)) letters.emplace_back(o, *w);

  struct Edge {
    int cls;
    int letter_idx;
  };
  size_t expanded = 0;
  auto succ = [&](const MhState& q) {
    std::vector<std::pair<Edge, MhState>> out;
    for (size_t c = 0; c < classes.size(); ++c) {
      uint64_t mask = abw.atom_mask_of_assignment(classes[c]);
      for (size_t li = 0; li < letters.size(); ++li)
        for (const MhState& nq : nbw.successors(q, mask, letters[li].first))
          out.emplace_back(Edge{static_cast<int>(c), static_cast<int>(li)}, nq);
    }
    if (++expanded > max_product) throw Error("state bound exceeded in satisfiability search");
    return out;
  };
  auto acc = [&](const MhState& q) { return nbw.accepting(q); };
  LassoSearch<MhState, Edge, MhHash> search(succ, acc);
  auto res = search.run({nbw.initial()});

  Verdict v;
  if (!res) {
    v.kind = Verdict::Kind::Unsat;
    return v;
  }
  v.kind = Verdict::Kind::Sat;
  for (size_t i = 0; i < res->steps.size(); ++i) {
    const auto& [node, edge] = res->steps[i];
    VerdictStep step;
    step.state = default_state(sys, abw.atom_vars(), classes[edge.cls]);
    step.message = letters[edge.letter_idx].second;
    (i < res->loop_start ? v.stem : v.loop).push_back(std::move(step));
  }
  return v;
}

// ---------------------------------------------------------------------
// Model checking
// ---------------------------------------------------------------------

Verdict model_check(const SystemDef& sys, const FormulaRef& f, size_t max_states) {
  FormulaRef negated = dual(f);
  Abw abw = formula_to_abw(sys, negated);
  Nbw nbw(abw);
  const auto& obs = abw.observations();
  SymbolicSystem sym(sys);

  // Materialize the reachable system graph; labels carry the letter of
  // their message so the product only matches consistent pairs.
  struct SysEdge {
    Message msg;
    Letter letter;
    int target;
  };
  std::vector<SystemState> states;
  std::vector<std::vector<SysEdge>> adj;
  std::vector<uint64_t> masks;
  std::unordered_map<SystemState, int, SystemStateHash> index;
  std::deque<int> queue;
  Verdict v;

  auto intern = [&](const SystemState& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    if (states.size() >= max_states) throw Error("state bound exceeded in model checking");
    int id = static_cast<int>(states.size());
    states.push_back(s);
    masks.push_back(abw.atom_mask_of(s));
    adj.emplace_back();
    index.emplace(s, id);
    queue.push_back(id);
    return id;
  };

  std::vector<int> init_ids;
  for (const auto& s : sym.initial_states()) init_ids.push_back(intern(s));
  size_t dead_ends = 0;
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    auto succs = sym.successors(states[id]);
    if (succs.empty()) {
      if (dead_ends < 5)
        v.notes.push_back("dead end (maximality violation) at " + to_string(sys, states[id]));
      ++dead_ends;
    }
    for (auto& [m, nx] : succs) {
      int t = intern(nx);
      adj[id].push_back({m, letter_of(sys, m, obs), t});
    }
  }
  if (dead_ends > 5)
    v.notes.push_back("(" + std::to_string(dead_ends) + " dead-end states in total)");

  using Node = std::pair<int, MhState>;
  auto succ = [&](const Node& nd) {
    std::vector<std::pair<int, Node>> out;  // edge: index into adj[nd.first]
    const auto& edges = adj[nd.first];
    for (size_t e = 0; e < edges.size(); ++e)
      for (const MhState& nq : nbw.successors(nd.second, masks[nd.first], edges[e].letter))
        out.emplace_back(static_cast<int>(e), Node{edges[e].target, nq});
    return out;
  };
  auto acc = [&](const Node& nd) { return nbw.accepting(nd.second); };
  LassoSearch<Node, int, PairHash> search(succ, acc);

  std::vector<Node> roots;
  for (int id : init_ids) roots.emplace_back(id, nbw.initial());
  auto res = search.run(roots);

  if (!res) {
    v.kind = Verdict::Kind::Holds;
    return v;
  }
  v.kind = Verdict::Kind::Fails;
  for (size_t i = 0; i < res->steps.size(); ++i) {
    const auto& [node, edge] = res->steps[i];
    VerdictStep step;
    step.state = states[node.first];
    step.message = adj[node.first][edge].msg;
    (i < res->loop_start ? v.stem : v.loop).push_back(std::move(step));
  }
  return v;
}

// ---------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------

namespace {

std::string cube_text(const Abw& abw, Cube c) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (size_t i = 0; i < abw.states().size(); ++i)
    if ((c >> i) & 1) {
      if (!first) os << ",";
      os << "q" << i;
      first = false;
    }
  os << "}";
  return os.str();
}

std::string set_text(const Abw& abw, uint64_t s) {
  std::ostringstream os;
  bool first = true;
  os << "{";
  for (size_t i = 0; i < abw.states().size(); ++i)
    if ((s >> i) & 1) {
      if (!first) os << ",";
      os << "q" << i;
      first = false;
    }
  os << "}";
  return os.str();
}

std::string letter_text(const Abw& abw, Letter o) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (size_t i = 0; i < abw.observations().size(); ++i)
    if ((o >> i) & 1) {
      if (!first) os << ", ";
      os << to_string(abw.system(), abw.observations()[i]);
      first = false;
    }
  os << "}";
  return os.str();
}

}  // namespace

std::string to_dot(const Abw& abw, const std::string& name) {
  if (abw.atoms().size() > 8 || abw.observations().size() > 5)
    throw Error("automaton alphabet too large for DOT export");
  const SystemDef& sys = abw.system();
  std::ostringstream os;
  os << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=ellipse, fontsize=10];\n";
  for (size_t q = 0; q < abw.states().size(); ++q) {
    if (abw.states()[q]->kind == FKind::False) continue;  // prune the false sink
    os << "  q" << q << " [label=\"" << to_string(sys, abw.states()[q]) << "\""
       << (((abw.accepting() >> q) & 1) ? ", peripheries=2" : "") << "];\n";
  }
  os << "  init [shape=point];\n  init -> q" << abw.initial() << ";\n";
  for (size_t q = 0; q < abw.states().size(); ++q) {
    if (abw.states()[q]->kind == FKind::False) continue;
    for (uint64_t am = 0; am < (1ull << abw.atoms().size()); ++am)
      for (Letter o = 0; o < (1u << abw.observations().size()); ++o) {
        Dnf d = abw.delta(static_cast<int>(q), am, o);
        for (size_t ci = 0; ci < d.size(); ++ci) {
          if (d[ci] == 0) continue;
          for (size_t t = 0; t < abw.states().size(); ++t)
            if ((d[ci] >> t) & 1)
              os << "  q" << q << " -> q" << t << " [label=\"am=" << am << " o="
                 << letter_text(abw, o) << " " << cube_text(abw, d[ci]) << "\"];\n";
        }
      }
  }
  os << "}\n";
  return os.str();
}

std::string to_dot_nbw(const Abw& abw, const std::string& name) {
  if (abw.atoms().size() > 8 || abw.observations().size() > 5)
    throw Error("automaton alphabet too large for DOT export");
  Nbw nbw(abw);
  std::map<MhState, int> ids;
  std::deque<MhState> queue;
  std::ostringstream edges;
  auto intern = [&](const MhState& s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(ids.size());
    if (id > 4096) throw Error("NBW too large for DOT export");
    ids.emplace(s, id);
    queue.push_back(s);
    return id;
  };
  intern(nbw.initial());
  while (!queue.empty()) {
    MhState s = queue.front();
    queue.pop_front();
    int sid = ids.at(s);
    for (uint64_t am = 0; am < (1ull << abw.atoms().size()); ++am)
      for (Letter o = 0; o < (1u << abw.observations().size()); ++o)
        for (const MhState& t : nbw.successors(s, am, o))
          edges << "  n" << sid << " -> n" << intern(t) << " [label=\"am=" << am
                << " o=" << letter_text(abw, o) << "\"];\n";
  }
  std::ostringstream os;
  os << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=ellipse, fontsize=10];\n";
  std::vector<std::pair<int, MhState>> ordered;
  for (const auto& [s, id] : ids) ordered.emplace_back(id, s);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, s] : ordered)
    os << "  n" << id << " [label=\"" << set_text(abw, s.all) << "|" << set_text(abw, s.owe)
       << "\"" << (s.owe == 0 ? ", peripheries=2" : "") << "];\n";
  os << "  init [shape=point];\n  init -> n0;\n";
  os << edges.str();
  os << "}\n";
  return os.str();
}

}  // namespace recipe
