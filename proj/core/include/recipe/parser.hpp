#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recipe/ltol.hpp"
#include "recipe/model.hpp"

namespace recipe {

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;
  int length = 1;
};

struct ParseError {
  SourceSpan span;
  std::string message;
  std::vector<std::string> expected;
};

std::string to_string(const ParseError& e);

template <typename T>
struct ParseResult {
  std::optional<T> value;
  std::vector<ParseError> errors;
  bool ok() const { return value.has_value() && errors.empty(); }
};

/// Parses the `.recipe` surface syntax and runs the model validators.
/// Returns either a validated system or every error found, with spans.
ParseResult<SystemDef> parse_system(std::string_view text, std::string file = "<input>");

/// Parses an `.ltol` formula over the vocabulary of `sys`. Surface
/// negation of compound formulas is eliminated through the dual operator,
/// so the result is in positive normal form.
ParseResult<FormulaRef> parse_formula(std::string_view text, const SystemDef& sys,
                                      std::string file = "<formula>");

/// Round-trips: parse_system(pretty_print(sys)) is structurally equal to
/// sys, and likewise for formulas.
std::string pretty_print(const SystemDef& sys);
std::string pretty_print(const SystemDef& sys, const FormulaRef& f);

/// Structural equality of systems as parsed artifacts (names, domains,
/// renamings and assertion trees).
bool system_equal(const SystemDef& a, const SystemDef& b);

}  // namespace recipe
