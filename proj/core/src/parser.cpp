#include "recipe/parser.hpp"

#include <cctype>
#include <sstream>

namespace recipe {

std::string to_string(const ParseError& e) {
  std::ostringstream os;
  os << e.span.file << ":" << e.span.line << ":" << e.span.column << ": " << e.message;
  if (!e.expected.empty()) {
    os << " (expected";
    for (size_t i = 0; i < e.expected.size(); ++i) os << (i ? ", " : " ") << e.expected[i];
    os << ")";
  }
  return os.str();
}

namespace {

enum class Tok {
  Ident, Number, Star, LBrace, RBrace, LParen, RParen, LBracket, RBracket,
  Less, Greater, Semi, Colon, Comma, Dot, Amp, Pipe, Bang, Arrow, Eq, Neq,
  Prime, At, End
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::string file, std::vector<ParseError>& errors)
      : src_(src), file_(std::move(file)), errors_(errors) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_; col_ = 1; ++pos_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_; ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      int l = line_, co = col_;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < src_.size()) {
          char d = src_[pos_];
          if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') { ++pos_; continue; }
          // hyphenated identifiers (send-guard), but leave '->' alone
          if (d == '-' && pos_ + 1 < src_.size() &&
              (std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '_')) {
            ++pos_;
            continue;
          }
          break;
        }
        std::string text(src_.substr(start, pos_ - start));
        col_ += static_cast<int>(pos_ - start);
        out.push_back({Tok::Ident, std::move(text), l, co});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string text(src_.substr(start, pos_ - start));
        col_ += static_cast<int>(pos_ - start);
        out.push_back({Tok::Number, std::move(text), l, co});
        continue;
      }
      auto push1 = [&](Tok k, const char* t) {
        out.push_back({k, t, l, co});
        ++pos_; ++col_;
      };
      switch (c) {
        case '*': push1(Tok::Star, "*"); break;
        case '{': push1(Tok::LBrace, "{"); break;
        case '}': push1(Tok::RBrace, "}"); break;
        case '(': push1(Tok::LParen, "("); break;
        case ')': push1(Tok::RParen, ")"); break;
        case '[': push1(Tok::LBracket, "["); break;
        case ']': push1(Tok::RBracket, "]"); break;
        case '<': push1(Tok::Less, "<"); break;
        case '>': push1(Tok::Greater, ">"); break;
        case ';': push1(Tok::Semi, ";"); break;
        case ':': push1(Tok::Colon, ":"); break;
        case ',': push1(Tok::Comma, ","); break;
        case '.': push1(Tok::Dot, "."); break;
        case '&': push1(Tok::Amp, "&"); break;
        case '|': push1(Tok::Pipe, "|"); break;
        case '\'': push1(Tok::Prime, "'"); break;
        case '@': push1(Tok::At, "@"); break;
        case '=': push1(Tok::Eq, "="); break;
        case '!':
          if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            out.push_back({Tok::Neq, "!=", l, co});
            pos_ += 2; col_ += 2;
          } else {
            push1(Tok::Bang, "!");
          }
          break;
        case '-':
          if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
            out.push_back({Tok::Arrow, "->", l, co});
            pos_ += 2; col_ += 2;
          } else {
            errors_.push_back({{file_, l, co, 1}, "stray '-'", {}});
            ++pos_; ++col_;
          }
          break;
        default:
          errors_.push_back({{file_, l, co, 1}, std::string("unexpected character '") + c + "'", {}});
          ++pos_; ++col_;
      }
    }
    out.push_back({Tok::End, "", line_, col_});
    return out;
  }

 private:
  std::string_view src_;
  std::string file_;
  std::vector<ParseError>& errors_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// Which scopes an assertion in a given role may reference.
struct RefContext {
  bool primed = false;
  bool data = false;
  bool channel = false;
  bool common = false;
};

class Parser {
 public:
  Parser(std::string_view text, std::string file)
      : file_(std::move(file)) {
    Lexer lex(text, file_, errors_);
    toks_ = lex.run();
  }

  std::vector<ParseError> take_errors() { return std::move(errors_); }

  // ---- system files ----

  std::optional<SystemDef> parse_system_file() {
    SystemDef sys;
    if (!eat_keyword("system")) {
      error_here("expected 'system'", {"system"});
      return std::nullopt;
    }
    if (at(Tok::Ident)) sys.name = take().text;
    expect(Tok::LBrace, "{");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      if (peek_keyword("channels")) parse_channels(sys);
      else if (peek_keyword("common")) parse_typed_decl(sys, sys.common_vars, "common");
      else if (peek_keyword("data")) parse_typed_decl(sys, sys.data_vars, "data");
      else if (peek_keyword("agent")) parse_agent(sys);
      else {
        error_here("expected a section", {"channels", "common", "data", "agent"});
        synchronize();
      }
    }
    expect(Tok::RBrace, "}");
    if (!errors_.empty()) return std::nullopt;

    for (const auto& msg : validate_system(sys)) {
      SourceSpan span{file_, 1, 1, 1};
      for (const auto& [name, sp] : agent_spans_)
        if (msg.rfind("agent " + name, 0) == 0) span = sp;
      errors_.push_back({span, msg, {}});
    }
    if (!errors_.empty()) return std::nullopt;
    return sys;
  }

  // ---- formula files ----

  std::optional<FormulaRef> parse_formula_file(const SystemDef& sys) {
    sys_ = &sys;
    FormulaRef f = parse_formula_expr();
    if (!at(Tok::End)) error_here("trailing input after formula", {});
    if (!errors_.empty()) return std::nullopt;
    return f;
  }

 private:
  // ---- token helpers ----

  const Token& cur() const { return toks_[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }
  Token take() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    take();
    return true;
  }
  bool peek_keyword(const char* kw) const { return at(Tok::Ident) && cur().text == kw; }
  bool eat_keyword(const char* kw) {
    if (!peek_keyword(kw)) return false;
    take();
    return true;
  }
  SourceSpan span_of(const Token& t) const {
    return {file_, t.line, t.col, std::max<int>(1, static_cast<int>(t.text.size()))};
  }
  void error_at(const Token& t, std::string msg, std::vector<std::string> exp = {}) {
    errors_.push_back({span_of(t), std::move(msg), std::move(exp)});
  }
  void error_here(std::string msg, std::vector<std::string> exp = {}) {
    error_at(cur(), std::move(msg), std::move(exp));
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) error_here(std::string("expected '") + what + "'", {what});
  }
  void synchronize() {
    while (!at(Tok::End) && !at(Tok::Semi) && !at(Tok::RBrace)) take();
    accept(Tok::Semi);
  }

  // ---- system sections ----

  void parse_channels(SystemDef& sys) {
    take();  // channels
    do {
      if (at(Tok::Star)) {
        take();  // the broadcast channel is implicit but may be listed
      } else if (at(Tok::Ident)) {
        Token t = take();
        Sym ch = sys.syms.intern(t.text);
        if (sys.channel_index(ch) >= 0) error_at(t, "duplicate channel " + t.text);
        else sys.channels.push_back(ch);
      } else {
        error_here("expected a channel name", {"identifier", "*"});
        break;
      }
    } while (accept(Tok::Comma));
    expect(Tok::Semi, ";");
  }

  int parse_domain(SystemDef& sys, const std::string& for_name) {
    if (eat_keyword("bool")) return 0;
    if (accept(Tok::LBrace)) {
      std::vector<Sym> values;
      do {
        if (at(Tok::Ident) || at(Tok::Number)) values.push_back(sys.syms.intern(take().text));
        else {
          error_here("expected a domain value", {"identifier", "number"});
          break;
        }
      } while (accept(Tok::Comma));
      expect(Tok::RBrace, "}");
      return sys.intern_domain(for_name, values);
    }
    error_here("expected a domain", {"bool", "{"});
    return 0;
  }

  void parse_typed_decl(SystemDef& sys, std::vector<VarDecl>& list, const char* kind) {
    take();  // common | data
    if (!at(Tok::Ident)) {
      error_here(std::string("expected a ") + kind + " variable name");
      synchronize();
      return;
    }
    Token name = take();
    expect(Tok::Colon, ":");
    int dom = parse_domain(sys, name.text);
    expect(Tok::Semi, ";");
    for (const auto& v : list)
      if (v.name == name.text) {
        error_at(name, std::string("redeclaration of ") + kind + " variable " + name.text);
        return;
      }
    // Common and data variables appear bare in descriptors, so the two
    // name spaces must not overlap.
    const auto& other = (&list == &sys.common_vars) ? sys.data_vars : sys.common_vars;
    for (const auto& v : other)
      if (v.name == name.text) {
        error_at(name, "variable " + name.text + " is declared both common and data");
        return;
      }
    list.push_back({name.text, sys.syms.intern(name.text), dom});
  }

  void parse_agent(SystemDef& sys) {
    Token kw = take();  // agent
    if (!at(Tok::Ident)) {
      error_here("expected an agent name");
      synchronize();
      return;
    }
    Token name = take();
    AgentDef ag;
    ag.name = name.text;
    ag.id = sys.syms.intern(name.text);
    ag.relabel.assign(sys.common_vars.size(), -1);
    agent_spans_.emplace_back(ag.name, span_of(kw));
    expect(Tok::LBrace, "{");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      if (eat_keyword("var")) {
        if (!at(Tok::Ident)) {
          error_here("expected a variable name");
          synchronize();
          continue;
        }
        Token vn = take();
        expect(Tok::Colon, ":");
        int dom = parse_domain(sys, ag.name + "." + vn.text);
        expect(Tok::Semi, ";");
        if (ag.var_index(sys.syms.intern(vn.text)) >= 0)
          error_at(vn, "redeclaration of variable " + vn.text);
        else
          ag.vars.push_back({vn.text, sys.syms.intern(vn.text), dom});
      } else if (eat_keyword("relabel")) {
        expect(Tok::At, "@");
        if (!at(Tok::Ident)) {
          error_here("expected a common variable");
          synchronize();
          continue;
        }
        Token cvn = take();
        int cv = sys.common_index(sys.syms.find(cvn.text));
        if (cv < 0) error_at(cvn, "undeclared common variable @" + cvn.text);
        expect(Tok::Arrow, "->");
        if (!at(Tok::Ident)) {
          error_here("expected a local variable");
          synchronize();
          continue;
        }
        Token ln = take();
        int lv = ag.var_index(sys.syms.find(ln.text));
        if (lv < 0) error_at(ln, "undeclared local variable " + ln.text);
        if (cv >= 0 && lv >= 0) ag.relabel[cv] = lv;
        expect(Tok::Semi, ";");
      } else if (eat_keyword("init")) {
        ag.init = parse_assertion(sys, ag, RefContext{});
        expect(Tok::Semi, ";");
      } else if (eat_keyword("send-guard")) {
        ag.send_guard = parse_assertion(sys, ag, RefContext{false, true, true, true});
        expect(Tok::Semi, ";");
      } else if (eat_keyword("recv-guard")) {
        ag.recv_guard = parse_assertion(sys, ag, RefContext{false, false, true, false});
        expect(Tok::Semi, ";");
      } else if (eat_keyword("send")) {
        ag.send_rel = parse_disjunct_block(sys, ag);
      } else if (eat_keyword("recv")) {
        ag.recv_rel = parse_disjunct_block(sys, ag);
      } else {
        error_here("expected an agent item",
                   {"var", "relabel", "init", "send-guard", "recv-guard", "send", "recv"});
        synchronize();
      }
    }
    expect(Tok::RBrace, "}");
    if (!ag.init) ag.init = make_true();
    if (!ag.send_guard) ag.send_guard = make_true();
    if (!ag.recv_guard) ag.recv_guard = make_true();
    if (!ag.send_rel) ag.send_rel = make_false();
    if (!ag.recv_rel) ag.recv_rel = make_false();
    if (sys.agent_index(ag.id) >= 0) error_at(name, "duplicate agent " + ag.name);
    else sys.agents.push_back(std::move(ag));
  }

  // A `{ d1; d2; ... }` block is the disjunction of its statements.
  AssertionRef parse_disjunct_block(SystemDef& sys, AgentDef& ag) {
    expect(Tok::LBrace, "{");
    AssertionRef out;
    RefContext ctx{true, true, true, false};
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      size_t before = pos_;
      AssertionRef d = parse_assertion(sys, ag, ctx);
      expect(Tok::Semi, ";");
      out = out ? make_or(std::move(out), std::move(d)) : d;
      if (pos_ == before) take();  // guarantee progress on malformed input
    }
    expect(Tok::RBrace, "}");
    return out ? out : make_false();
  }

  // ---- assertions ----

  AssertionRef parse_assertion(SystemDef& sys, AgentDef& ag, RefContext ctx) {
    return parse_implies(sys, ag, ctx);
  }

  AssertionRef parse_implies(SystemDef& sys, AgentDef& ag, RefContext ctx) {
    AssertionRef a = parse_or(sys, ag, ctx);
    if (accept(Tok::Arrow)) return make_implies(std::move(a), parse_implies(sys, ag, ctx));
    return a;
  }

  AssertionRef parse_or(SystemDef& sys, AgentDef& ag, RefContext ctx) {
    AssertionRef a = parse_and(sys, ag, ctx);
    while (accept(Tok::Pipe)) a = make_or(std::move(a), parse_and(sys, ag, ctx));
    return a;
  }

  AssertionRef parse_and(SystemDef& sys, AgentDef& ag, RefContext ctx) {
    AssertionRef a = parse_unary(sys, ag, ctx);
    while (accept(Tok::Amp)) a = make_and(std::move(a), parse_unary(sys, ag, ctx));
    return a;
  }

  AssertionRef parse_unary(SystemDef& sys, AgentDef& ag, RefContext ctx) {
    if (accept(Tok::Bang)) return make_not(parse_unary(sys, ag, ctx));
    if (accept(Tok::LParen)) {
      AssertionRef a = parse_assertion(sys, ag, ctx);
      expect(Tok::RParen, ")");
      return a;
    }
    if (peek_keyword("true")) { take(); return make_true(); }
    if (peek_keyword("false")) { take(); return make_false(); }
    if (peek_keyword("exists") || peek_keyword("forall")) {
      bool ex = cur().text == "exists";
      take();
      RefContext inner = ctx;
      inner.common = true;
      AssertionRef body = parse_unary(sys, ag, inner);
      return ex ? make_exists_cv(std::move(body)) : make_forall_cv(std::move(body));
    }
    if (peek_keyword("keep")) {
      Token kw = take();
      expect(Tok::LParen, "(");
      if (!ctx.primed) error_at(kw, "keep(...) is only allowed in transition relations");
      AssertionRef out;
      auto add = [&](int vi) {
        const VarDecl& v = ag.vars[vi];
        AssertionRef c = make_cmp(
            Term::ref(Scope::LocalCur, static_cast<int16_t>(vi), static_cast<int16_t>(v.domain), v.name_sym),
            Term::ref(Scope::LocalNext, static_cast<int16_t>(vi), static_cast<int16_t>(v.domain), v.name_sym),
            false);
        out = out ? make_and(std::move(out), std::move(c)) : c;
      };
      if (peek_keyword("all")) {
        take();
        for (size_t i = 0; i < ag.vars.size(); ++i) add(static_cast<int>(i));
      } else {
        do {
          if (!at(Tok::Ident)) {
            error_here("expected a variable name in keep(...)");
            break;
          }
          Token t = take();
          int vi = ag.var_index(sys.syms.find(t.text));
          if (vi < 0) error_at(t, "undeclared variable " + t.text + " in keep(...)");
          else add(vi);
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, ")");
      return out ? out : make_true();
    }

    Token first = cur();
    std::optional<Term> lhs = parse_term(sys, ag, ctx);
    if (!lhs) {
      take();
      synchronize_expr();
      return make_true();
    }
    bool neq = false;
    if (at(Tok::Eq) || at(Tok::Neq)) {
      neq = at(Tok::Neq);
      take();
      std::optional<Term> rhs = parse_term(sys, ag, ctx);
      if (!rhs) {
        take();
        return make_true();
      }
      check_cmp_domains(first, *lhs, *rhs, sys);
      return make_cmp(*lhs, *rhs, neq);
    }
    // Bare term: boolean variable reference.
    if (lhs->is_const) {
      error_at(first, "constant '" + first.text + "' is not a formula; expected a comparison");
      return make_true();
    }
    if (lhs->domain != 0) {
      error_at(first, "variable " + first.text + " is not boolean; expected a comparison");
      return make_true();
    }
    return make_cmp(*lhs, Term::constant(sys.sym_true), false);
  }

  void synchronize_expr() {
    while (!at(Tok::End) && !at(Tok::Semi) && !at(Tok::RBrace) && !at(Tok::RParen)) take();
  }

  std::optional<Term> parse_term(SystemDef& sys, AgentDef& ag, RefContext ctx) {
    if (at(Tok::Star)) {
      take();
      return Term::constant(sys.star);
    }
    if (at(Tok::Number)) return Term::constant(sys.syms.intern(take().text));
    if (accept(Tok::At)) {
      if (!at(Tok::Ident)) {
        error_here("expected a common variable after '@'");
        return std::nullopt;
      }
      Token t = take();
      int cv = sys.common_index(sys.syms.find(t.text));
      if (cv < 0) {
        error_at(t, "undeclared common variable @" + t.text);
        return std::nullopt;
      }
      if (!ctx.common)
        error_at(t, "common variables are not allowed in this assertion");
      const VarDecl& v = sys.common_vars[cv];
      return Term::ref(Scope::Common, static_cast<int16_t>(cv), static_cast<int16_t>(v.domain), v.name_sym);
    }
    if (!at(Tok::Ident)) {
      error_here("expected a term");
      return std::nullopt;
    }
    Token t = take();
    if (t.text == "ch") {
      if (!ctx.channel) error_at(t, "the channel is not in scope in this assertion");
      return Term::ref(Scope::Channel, 0, -1);
    }
    if (t.text == "d") {
      expect(Tok::LParen, "(");
      if (!at(Tok::Ident)) {
        error_here("expected a data variable");
        return std::nullopt;
      }
      Token dn = take();
      expect(Tok::RParen, ")");
      int di = sys.data_index(sys.syms.find(dn.text));
      if (di < 0) {
        error_at(dn, "undeclared data variable " + dn.text);
        return std::nullopt;
      }
      if (!ctx.data) error_at(dn, "data variables are not allowed in this assertion");
      const VarDecl& v = sys.data_vars[di];
      return Term::ref(Scope::Data, static_cast<int16_t>(di), static_cast<int16_t>(v.domain), v.name_sym);
    }
    int vi = ag.var_index(sys.syms.find(t.text));
    if (vi >= 0) {
      const VarDecl& v = ag.vars[vi];
      bool primed = accept(Tok::Prime);
      if (primed && !ctx.primed)
        error_at(t, "primed variables are only allowed in transition relations");
      return Term::ref(primed ? Scope::LocalNext : Scope::LocalCur, static_cast<int16_t>(vi),
                       static_cast<int16_t>(v.domain), v.name_sym);
    }
    // Unknown identifier: a symbolic constant. Domain compatibility of the
    // enclosing comparison catches typos.
    return Term::constant(sys.syms.intern(t.text));
  }

  void check_cmp_domains(const Token& where, const Term& lhs, const Term& rhs, SystemDef& sys) {
    auto values_of = [&](const Term& t) -> const std::vector<Sym>* {
      if (t.is_const) return nullptr;
      if (t.scope == Scope::Channel) return &sys.channels;
      return &sys.domains[t.domain].values;
    };
    const std::vector<Sym>* lv = values_of(lhs);
    const std::vector<Sym>* rv = values_of(rhs);
    auto contains = [](const std::vector<Sym>& vs, Sym s) {
      for (Sym v : vs)
        if (v == s) return true;
      return false;
    };
    if (lv && rv) {
      for (Sym v : *lv)
        if (contains(*rv, v)) return;
      error_at(where, "type mismatch: compared domains share no value");
    } else if (lv && rhs.is_const) {
      if (!contains(*lv, rhs.value))
        error_at(where, "value " + sys.syms.name(rhs.value) + " is outside the domain of the left-hand side");
    } else if (rv && lhs.is_const) {
      if (!contains(*rv, lhs.value))
        error_at(where, "value " + sys.syms.name(lhs.value) + " is outside the domain of the right-hand side");
    } else {
      error_at(where, "comparison of two constants");
    }
  }

  // ---- formulas ----

  FormulaRef parse_formula_expr() {
    FormulaRef a = parse_f_or();
    if (accept(Tok::Arrow)) {
      FormulaRef b = parse_formula_expr();
      return f_or(dual(a), std::move(b));
    }
    return a;
  }

  FormulaRef parse_f_or() {
    FormulaRef a = parse_f_and();
    while (accept(Tok::Pipe)) a = f_or(std::move(a), parse_f_and());
    return a;
  }

  FormulaRef parse_f_and() {
    FormulaRef a = parse_f_temporal();
    while (accept(Tok::Amp)) a = f_and(std::move(a), parse_f_temporal());
    return a;
  }

  FormulaRef parse_f_temporal() {
    FormulaRef a = parse_f_unary();
    if (peek_keyword("U")) {
      take();
      return f_until(std::move(a), parse_f_temporal());
    }
    if (peek_keyword("R")) {
      take();
      return f_release(std::move(a), parse_f_temporal());
    }
    if (peek_keyword("W")) {
      take();
      return f_weak_until(std::move(a), parse_f_temporal());
    }
    return a;
  }

  FormulaRef parse_f_unary() {
    if (accept(Tok::Bang)) return dual(parse_f_unary());
    if (peek_keyword("G")) { take(); return f_globally(parse_f_unary()); }
    if (peek_keyword("F")) { take(); return f_eventually(parse_f_unary()); }
    if (peek_keyword("true")) { take(); return f_const(true); }
    if (peek_keyword("false")) { take(); return f_const(false); }
    if (accept(Tok::Less)) {
      DescriptorRef o = parse_descriptor();
      expect(Tok::Greater, ">");
      return f_possible(normalize_descriptor(o), parse_f_unary());
    }
    if (accept(Tok::LBracket)) {
      DescriptorRef o = parse_descriptor();
      expect(Tok::RBracket, "]");
      return f_necessary(normalize_descriptor(o), parse_f_unary());
    }
    if (accept(Tok::LParen)) {
      FormulaRef a = parse_formula_expr();
      expect(Tok::RParen, ")");
      return a;
    }
    return parse_f_atom();
  }

  FormulaRef parse_f_atom() {
    if (!at(Tok::Ident)) {
      error_here("expected a formula");
      take();
      return f_const(true);
    }
    Token t = take();
    int agent = -1, var = -1;
    if (accept(Tok::Dot)) {
      agent = sys_->agent_index(sys_->syms.find(t.text));
      if (agent < 0) {
        error_at(t, "undeclared agent " + t.text);
        skip_atom_tail();
        return f_const(true);
      }
      if (!at(Tok::Ident)) {
        error_here("expected a variable name after '.'");
        return f_const(true);
      }
      Token vn = take();
      var = sys_->agents[agent].var_index(sys_->syms.find(vn.text));
      if (var < 0) {
        error_at(vn, "agent " + t.text + " has no variable " + vn.text);
        skip_atom_tail();
        return f_const(true);
      }
    } else {
      // Unqualified: resolve against the unique agent declaring the name.
      Sym n = sys_->syms.find(t.text);
      for (size_t a = 0; a < sys_->agents.size(); ++a) {
        int vi = sys_->agents[a].var_index(n);
        if (vi < 0) continue;
        if (agent >= 0) {
          error_at(t, "ambiguous variable " + t.text + "; qualify it as <agent>." + t.text);
          skip_atom_tail();
          return f_const(true);
        }
        agent = static_cast<int>(a);
        var = vi;
      }
      if (agent < 0) {
        error_at(t, "undeclared state variable " + t.text);
        skip_atom_tail();
        return f_const(true);
      }
    }
    const VarDecl& v = sys_->agents[agent].vars[var];
    if (at(Tok::Eq) || at(Tok::Neq)) {
      bool neq = at(Tok::Neq);
      take();
      Sym val = parse_value_token();
      if (val != kNoSym && !sys_->domains[v.domain].contains(val))
        error_at(t, "value is outside the domain of " + v.name);
      return f_atom(static_cast<int16_t>(agent), static_cast<int16_t>(var), val, neq);
    }
    if (v.domain != 0) {
      error_at(t, "variable " + v.name + " is not boolean; expected a comparison");
      return f_const(true);
    }
    return f_atom(static_cast<int16_t>(agent), static_cast<int16_t>(var), sys_->sym_true, false);
  }

  void skip_atom_tail() {
    if (at(Tok::Eq) || at(Tok::Neq)) {
      take();
      if (at(Tok::Ident) || at(Tok::Number) || at(Tok::Star)) take();
    }
  }

  Sym parse_value_token() {
    if (at(Tok::Ident) || at(Tok::Number)) {
      Token t = take();
      Sym s = sys_->syms.find(t.text);
      if (s == kNoSym) error_at(t, "unknown value " + t.text);
      return s;
    }
    if (at(Tok::Star)) {
      take();
      return sys_->star;
    }
    error_here("expected a value", {"identifier", "number", "*"});
    return kNoSym;
  }

  // ---- descriptors ----

  DescriptorRef parse_descriptor() { return parse_d_or(); }

  DescriptorRef parse_d_or() {
    DescriptorRef a = parse_d_and();
    while (accept(Tok::Pipe)) a = desc_or(std::move(a), parse_d_and());
    return a;
  }

  DescriptorRef parse_d_and() {
    DescriptorRef a = parse_d_unary();
    while (accept(Tok::Amp)) a = desc_and(std::move(a), parse_d_unary());
    return a;
  }

  DescriptorRef parse_d_unary() {
    if (accept(Tok::Bang)) return dual(parse_d_unary());
    if (accept(Tok::LParen)) {
      DescriptorRef a = parse_d_or();
      expect(Tok::RParen, ")");
      return a;
    }
    if (accept(Tok::Less)) {
      DescriptorRef a = parse_d_or();
      expect(Tok::Greater, ">");
      return desc_exists(std::move(a));
    }
    if (accept(Tok::LBracket)) {
      DescriptorRef a = parse_d_or();
      expect(Tok::RBracket, "]");
      return desc_forall(std::move(a));
    }
    if (peek_keyword("some") || peek_keyword("all")) {
      bool ex = cur().text == "some";
      take();
      expect(Tok::LParen, "(");
      DescriptorRef a = parse_d_or();
      expect(Tok::RParen, ")");
      return ex ? desc_exists(std::move(a)) : desc_forall(std::move(a));
    }
    if (peek_keyword("true")) { take(); return desc_const(true); }
    if (peek_keyword("false")) { take(); return desc_const(false); }
    return parse_d_atom();
  }

  DescriptorRef parse_d_atom() {
    if (!at(Tok::Ident)) {
      error_here("expected a descriptor");
      take();
      return desc_const(true);
    }
    Token t = take();
    if (t.text == "ch") {
      if (!at(Tok::Eq) && !at(Tok::Neq)) {
        error_here("expected '=' or '!=' after ch");
        return desc_const(true);
      }
      bool neq = at(Tok::Neq);
      take();
      Sym val = parse_value_token();
      if (val != kNoSym && sys_->channel_index(val) < 0)
        error_at(t, "undeclared channel in descriptor");
      return desc_chan(val, neq);
    }
    Sym n = sys_->syms.find(t.text);
    int cv = n == kNoSym ? -1 : sys_->common_index(n);
    int dv = n == kNoSym ? -1 : sys_->data_index(n);
    if (at(Tok::Eq) || at(Tok::Neq)) {
      bool neq = at(Tok::Neq);
      take();
      Sym val = parse_value_token();
      if (cv >= 0) {
        if (val != kNoSym && !sys_->domains[sys_->common_vars[cv].domain].contains(val))
          error_at(t, "value is outside the domain of common variable " + t.text);
        return desc_cv(static_cast<int16_t>(cv), val, neq);
      }
      if (dv >= 0) {
        if (val != kNoSym && !sys_->domains[sys_->data_vars[dv].domain].contains(val))
          error_at(t, "value is outside the domain of data variable " + t.text);
        return desc_data(static_cast<int16_t>(dv), val, neq);
      }
      error_at(t, "undeclared common or data variable " + t.text);
      return desc_const(true);
    }
    // Bare name: a sender identity, or a boolean common/data variable.
    if (n != kNoSym && sys_->agent_index(n) >= 0) return desc_sender(n, false);
    if (cv >= 0 && sys_->common_vars[cv].domain == 0)
      return desc_cv(static_cast<int16_t>(cv), sys_->sym_true, false);
    if (dv >= 0 && sys_->data_vars[dv].domain == 0)
      return desc_data(static_cast<int16_t>(dv), sys_->sym_true, false);
    error_at(t, "unknown descriptor atom " + t.text);
    return desc_const(true);
  }

  std::string file_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<ParseError> errors_;
  std::vector<std::pair<std::string, SourceSpan>> agent_spans_;
  const SystemDef* sys_ = nullptr;
};

}  // namespace

ParseResult<SystemDef> parse_system(std::string_view text, std::string file) {
  Parser p(text, std::move(file));
  ParseResult<SystemDef> out;
  out.value = p.parse_system_file();
  out.errors = p.take_errors();
  if (!out.errors.empty()) out.value.reset();
  return out;
}

ParseResult<FormulaRef> parse_formula(std::string_view text, const SystemDef& sys,
                                      std::string file) {
  Parser p(text, std::move(file));
  ParseResult<FormulaRef> out;
  out.value = p.parse_formula_file(sys);
  out.errors = p.take_errors();
  if (!out.errors.empty()) out.value.reset();
  return out;
}

namespace {

void print_domain(const SystemDef& sys, int dom, std::ostream& os) {
  if (dom == 0) {
    os << "bool";
    return;
  }
  const Domain& d = sys.domains[dom];
  os << "{";
  for (size_t i = 0; i < d.values.size(); ++i) os << (i ? ", " : "") << sys.syms.name(d.values[i]);
  os << "}";
}

void print_disjuncts(const SystemDef& sys, const AssertionRef& a, std::ostream& os) {
  // Split the left-associated Or spine back into statements.
  if (a->kind == AKind::Or) {
    print_disjuncts(sys, a->a, os);
    os << "    " << to_string(sys, a->b) << ";\n";
    return;
  }
  if (a->kind == AKind::False) return;  // empty block
  os << "    " << to_string(sys, a) << ";\n";
}

}  // namespace

std::string pretty_print(const SystemDef& sys) {
  std::ostringstream os;
  os << "system " << (sys.name.empty() ? "s" : sys.name) << " {\n";
  os << "  channels ";
  for (size_t i = 0; i < sys.channels.size(); ++i)
    os << (i ? ", " : "") << sys.syms.name(sys.channels[i]);
  os << ";\n\n";
  for (const auto& v : sys.common_vars) {
    os << "  common " << v.name << " : ";
    print_domain(sys, v.domain, os);
    os << ";\n";
  }
  for (const auto& v : sys.data_vars) {
    os << "  data " << v.name << " : ";
    print_domain(sys, v.domain, os);
    os << ";\n";
  }
  for (const auto& ag : sys.agents) {
    os << "\n  agent " << ag.name << " {\n";
    for (const auto& v : ag.vars) {
      os << "    var " << v.name << " : ";
      print_domain(sys, v.domain, os);
      os << ";\n";
    }
    for (size_t cv = 0; cv < sys.common_vars.size(); ++cv)
      if (ag.relabel[cv] >= 0)
        os << "    relabel @" << sys.common_vars[cv].name << " -> "
           << ag.vars[ag.relabel[cv]].name << ";\n";
    os << "    init " << to_string(sys, ag.init) << ";\n";
    os << "    send-guard " << to_string(sys, ag.send_guard) << ";\n";
    os << "    recv-guard " << to_string(sys, ag.recv_guard) << ";\n";
    os << "    send {\n";
    print_disjuncts(sys, ag.send_rel, os);
    os << "    }\n";
    os << "    recv {\n";
    print_disjuncts(sys, ag.recv_rel, os);
    os << "    }\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

std::string pretty_print(const SystemDef& sys, const FormulaRef& f) {
  return to_string(sys, f);
}

namespace {

// Two independently parsed systems intern symbols in different orders, so
// constants are compared through their names, references through their
// (scope, index) coordinates.
bool term_equal_by_name(const SystemDef& sa, const Term& x, const SystemDef& sb, const Term& y) {
  if (x.is_const != y.is_const) return false;
  if (x.is_const) return sa.syms.name(x.value) == sb.syms.name(y.value);
  return x.scope == y.scope && x.index == y.index;
}

bool assertion_equal_by_name(const SystemDef& sa, const AssertionRef& x, const SystemDef& sb,
                             const AssertionRef& y) {
  if (!x || !y) return x == y;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case AKind::True:
    case AKind::False:
      return true;
    case AKind::Cmp:
      return x->neq == y->neq && term_equal_by_name(sa, x->lhs, sb, y->lhs) &&
             term_equal_by_name(sa, x->rhs, sb, y->rhs);
    case AKind::Not:
    case AKind::ExistsCv:
    case AKind::ForallCv:
      return assertion_equal_by_name(sa, x->a, sb, y->a);
    default:
      return assertion_equal_by_name(sa, x->a, sb, y->a) &&
             assertion_equal_by_name(sa, x->b, sb, y->b);
  }
}

}  // namespace

bool system_equal(const SystemDef& a, const SystemDef& b) {
  auto names = [](const SystemDef& s, const std::vector<Sym>& syms) {
    std::vector<std::string> out;
    for (Sym x : syms) out.push_back(s.syms.name(x));
    return out;
  };
  if (names(a, a.channels) != names(b, b.channels)) return false;
  auto decls_equal = [&](const std::vector<VarDecl>& x, const std::vector<VarDecl>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i].name != y[i].name) return false;
      if (names(a, a.domains[x[i].domain].values) != names(b, b.domains[y[i].domain].values))
        return false;
    }
    return true;
  };
  if (!decls_equal(a.common_vars, b.common_vars)) return false;
  if (!decls_equal(a.data_vars, b.data_vars)) return false;
  if (a.agents.size() != b.agents.size()) return false;
  for (size_t i = 0; i < a.agents.size(); ++i) {
    const AgentDef& x = a.agents[i];
    const AgentDef& y = b.agents[i];
    if (x.name != y.name || x.relabel != y.relabel) return false;
    if (!decls_equal(x.vars, y.vars)) return false;
    if (!assertion_equal_by_name(a, x.init, b, y.init)) return false;
    if (!assertion_equal_by_name(a, x.send_guard, b, y.send_guard)) return false;
    if (!assertion_equal_by_name(a, x.recv_guard, b, y.recv_guard)) return false;
    if (!assertion_equal_by_name(a, x.send_rel, b, y.send_rel)) return false;
    if (!assertion_equal_by_name(a, x.recv_rel, b, y.recv_rel)) return false;
  }
  return true;
}

}  // namespace recipe
