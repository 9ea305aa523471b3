// recipe-mc: parse ReCiPe system specifications, simulate them, check the
// equivalence of their two semantics, and decide LTOL satisfiability and
// model checking.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "recipe/automata.hpp"
#include "recipe/parser.hpp"
#include "recipe/serialize.hpp"
#include "recipe/symbolic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProperty = 1;  // fails / unsat / divergence
constexpr int kExitUsage = 2;     // usage, parse or validation errors
constexpr int kExitDeadEnd = 3;   // simulation hit a dead end

struct Options {
  std::string format = "text";
  uint64_t seed = 0;
  int steps = 20;
  size_t max_states = 1u << 22;
  bool quiet = false;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::optional<recipe::SystemDef> load_system(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    return std::nullopt;
  }
  auto res = recipe::parse_system(*text, path);
  if (!res.value) {
    for (const auto& e : res.errors) std::cerr << to_string(e) << "\n";
    return std::nullopt;
  }
  return std::move(res.value);
}

std::optional<recipe::FormulaRef> load_formula(const std::string& path,
                                               const recipe::SystemDef& sys) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    return std::nullopt;
  }
  auto res = recipe::parse_formula(*text, sys, path);
  if (!res.value) {
    for (const auto& e : res.errors) std::cerr << to_string(e) << "\n";
    return std::nullopt;
  }
  return std::move(res.value);
}

void print_witness_text(const recipe::SystemDef& sys, const recipe::Verdict& v,
                        std::ostream& os) {
  os << "stem:\n";
  for (const auto& s : v.stem)
    os << "  " << to_string(sys, s.state) << "\n    -- " << to_string(sys, s.message) << "\n";
  os << "loop:\n";
  for (const auto& s : v.loop)
    os << "  " << to_string(sys, s.state) << "\n    -- " << to_string(sys, s.message) << "\n";
}

int emit_verdict(const recipe::SystemDef& sys, const recipe::Verdict& v, const Options& opt) {
  if (!opt.quiet)
    for (const auto& n : v.notes) std::cerr << "note: " << n << "\n";
  if (opt.format == "json") {
    std::cout << recipe::verdict_json(sys, v) << "\n";
  } else {
    std::cout << to_string(v.kind) << "\n";
    if (v.has_witness() && !opt.quiet) print_witness_text(sys, v, std::cout);
  }
  bool good = v.kind == recipe::Verdict::Kind::Holds || v.kind == recipe::Verdict::Kind::Sat;
  return good ? kExitOk : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReCiPe reconfigurable multi-agent systems: simulation, "
               "semantics equivalence, LTOL satisfiability and model checking"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env = std::getenv("RECIPE_MC_MAX_STATES")) opt.max_states = std::strtoull(env, nullptr, 10);

  std::string system_path, formula_path, vocab_path, what = "cts";
  bool mutate = false;

  auto add_common = [&](CLI::App* cmd, bool with_format = true) {
    if (with_format) cmd->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"text", "json", "dot"}));
    cmd->add_option("--max-states", opt.max_states, "Abort when this many states are explored");
    cmd->add_flag("--quiet", opt.quiet, "Suppress notes and witness text");
  };

  CLI::App* check = app.add_subcommand("check", "Model-check an LTOL formula on a system");
  check->add_option("system", system_path, "System specification (.recipe)")->required();
  check->add_option("formula", formula_path, "LTOL formula (.ltol)")->required();
  add_common(check);

  CLI::App* sat = app.add_subcommand("sat", "Decide LTOL satisfiability over a vocabulary");
  sat->add_option("formula", formula_path, "LTOL formula (.ltol)")->required();
  sat->add_option("vocab", vocab_path, "System declaring the vocabulary (.recipe)")->required();
  add_common(sat);

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a reproducible trace prefix");
  simulate->add_option("system", system_path, "System specification (.recipe)")->required();
  simulate->add_option("--seed", opt.seed, "Random seed for the choice policy");
  simulate->add_option("--steps", opt.steps, "Number of steps");
  add_common(simulate);

  CLI::App* equiv = app.add_subcommand(
      "equiv", "Cross-check the enumerative and symbolic semantics of a system");
  equiv->add_option("system", system_path, "System specification (.recipe)")->required();
  equiv->add_flag("--mutate", mutate,
                  "Diagnostic: corrupt one composition rule to demonstrate divergence reporting");
  add_common(equiv);

  CLI::App* graph = app.add_subcommand("graph", "Export DOT graphs (CTS or automata)");
  graph->add_option("system", system_path, "System specification (.recipe)")->required();
  graph->add_option("--formula", formula_path, "Formula for automaton export");
  graph->add_option("--what", what, "What to export")
      ->check(CLI::IsMember({"cts", "abw", "nbw"}));
  add_common(graph, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check->parsed()) {
      auto sys = load_system(system_path);
      if (!sys) return kExitUsage;
      auto f = load_formula(formula_path, *sys);
      if (!f) return kExitUsage;
      return emit_verdict(*sys, recipe::model_check(*sys, *f, opt.max_states), opt);
    }

    if (sat->parsed()) {
      auto sys = load_system(vocab_path);
      if (!sys) return kExitUsage;
      auto f = load_formula(formula_path, *sys);
      if (!f) return kExitUsage;
      return emit_verdict(*sys, recipe::satisfiable(*sys, *f, opt.max_states), opt);
    }

    if (simulate->parsed()) {
      auto sys = load_system(system_path);
      if (!sys) return kExitUsage;
      auto inits = recipe::initial_states(*sys);
      if (inits.empty()) {
        std::cerr << "error: the system has no initial state\n";
        return kExitUsage;
      }
      recipe::SymbolicSystem sym(*sys);
      // The seed picks the initial state as well as each step.
      std::vector<recipe::TraceStep> steps;
      try {
        steps = sym.trace(inits[opt.seed % inits.size()], opt.seed, opt.steps);
      } catch (const recipe::DeadEndError& e) {
        std::cerr << "error: " << e.what() << "\n  last state: " << to_string(*sys, e.state)
                  << "\n";
        return kExitDeadEnd;
      }
      if (opt.format == "text") {
        for (const auto& st : steps)
          std::cout << to_string(*sys, st.state) << "\n  -- " << to_string(*sys, st.message)
                    << "\n";
      } else {
        std::cout << recipe::trace_jsonl(*sys, steps);
      }
      return kExitOk;
    }

    if (equiv->parsed()) {
      auto sys = load_system(system_path);
      if (!sys) return kExitUsage;
      recipe::FullAbstractionReport rep;
      if (mutate) {
        // Drop every broadcast transition of the composed CTS: a corrupted
        // composition that the cross-check is expected to flag.
        class Dropped : public recipe::CtsView {
         public:
          Dropped(recipe::CtsPtr inner, recipe::Sym star) : inner_(std::move(inner)), star_(star) {}
          int state_width() const override { return inner_->state_width(); }
          std::vector<recipe::Assignment> initial_states() const override {
            return inner_->initial_states();
          }
          bool listening(std::span<const recipe::Sym> s, recipe::Sym c) const override {
            return inner_->listening(s, c);
          }
          std::string state_name(const recipe::SystemDef& sys,
                                 std::span<const recipe::Sym> s) const override {
            return inner_->state_name(sys, s);
          }
          std::vector<std::pair<recipe::TransLabel, recipe::Assignment>> successors(
              std::span<const recipe::Sym> s) const override {
            auto all = inner_->successors(s);
            std::erase_if(all, [&](const auto& t) {
              return t.first.send && t.first.channel == star_;
            });
            return all;
          }
         private:
          recipe::CtsPtr inner_;
          recipe::Sym star_;
        };
        Dropped view(recipe::compose_system(*sys), sys->star);
        rep = recipe::compare_send_semantics(*sys, view, opt.max_states);
      } else {
        rep = recipe::full_abstraction_check(*sys, opt.max_states);
      }
      if (!opt.quiet)
        for (const auto& n : rep.notes) std::cerr << "note: " << n << "\n";
      if (opt.format == "json") {
        std::cout << recipe::report_json(*sys, rep) << "\n";
      } else {
        std::cout << (rep.equivalent ? "equivalent" : "divergent") << " ("
                  << rep.states_checked << " states, " << rep.transitions_checked
                  << " transitions checked)\n";
        for (const auto& d : rep.divergences)
          std::cout << "  at " << to_string(*sys, d.state) << ": " << d.detail << "\n";
      }
      return rep.equivalent ? kExitOk : kExitProperty;
    }

    if (graph->parsed()) {
      auto sys = load_system(system_path);
      if (!sys) return kExitUsage;
      if (what == "cts") {
        auto reach = recipe::materialize_reachable(
            *sys, *recipe::closed_send_graph(recipe::compose_system(*sys)), opt.max_states);
        std::cout << recipe::to_dot(*sys, *reach, sys->name.empty() ? "cts" : sys->name);
        return kExitOk;
      }
      if (formula_path.empty()) {
        std::cerr << "error: --formula is required for automaton export\n";
        return kExitUsage;
      }
      auto f = load_formula(formula_path, *sys);
      if (!f) return kExitUsage;
      recipe::Abw abw = recipe::formula_to_abw(*sys, *f);
      std::cout << (what == "abw" ? recipe::to_dot(abw) : recipe::to_dot_nbw(abw));
      return kExitOk;
    }
  } catch (const recipe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
