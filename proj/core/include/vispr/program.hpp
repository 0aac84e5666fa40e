#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vispr/registry.hpp"

namespace vispr {

// Marker substrings that route a completion down the fast path.  Algorithm
// membership test: the planner either writes the marker comment or calls the
// fast module directly.
inline constexpr const char* kFastMarker = "fast_reasoning";
inline constexpr const char* kFastModule = "fast_think";

// Variables that are bound by the runtime before the first statement runs.
// Planner completions may reference them without defining them.
const std::vector<std::string>& context_variables();
bool is_context_variable(const std::string& name);

// An argument is either a literal or a reference to a previously defined
// variable (or a context variable).
struct ArgValue {
  bool is_var = false;
  std::string var;  // set when is_var
  Literal lit;      // set when !is_var

  static ArgValue variable(std::string name) {
    ArgValue a;
    a.is_var = true;
    a.var = std::move(name);
    return a;
  }
  static ArgValue literal(Literal l) {
    ArgValue a;
    a.lit = std::move(l);
    return a;
  }

  std::string render() const { return is_var ? var : lit.render(); }

  bool operator==(const ArgValue&) const = default;
};

struct Arg {
  std::string name;
  ArgValue value;

  bool operator==(const Arg&) const = default;
};

// Inclusive 1-based line range; diagnostics only, excluded from equality.
struct LineSpan {
  int begin = 0;
  int end = 0;
};

struct Statement {
  std::vector<std::string> targets;  // one or two
  std::string module;                // canonical registry name
  std::vector<Arg> args;             // source order, names unique
  LineSpan source_span;

  const ArgValue* find_arg(const std::string& name) const;

  bool operator==(const Statement& o) const {
    return targets == o.targets && module == o.module && args == o.args;
  }
};

struct Program {
  std::vector<Statement> statements;
  std::vector<std::string> planning_text;  // '#' comment lines, markers stripped
  bool has_fast_marker = false;
  bool terminated = false;                  // saw `return <var>`
  std::optional<std::string> return_variable;
  std::vector<std::string> warnings;        // non-fatal parse notes

  bool operator==(const Program& o) const {
    return statements == o.statements && planning_text == o.planning_text &&
           has_fast_marker == o.has_fast_marker && terminated == o.terminated &&
           return_variable == o.return_variable;
  }
};

// One point in the search grid: set `param_name` of statement
// `statement_index` to `value`.
struct ParamBinding {
  std::size_t statement_index = 0;
  std::string param_name;
  Literal value;

  bool operator==(const ParamBinding&) const = default;
};

// Parses a raw planner completion.  Lines are either blank, `# comment`,
// `target[, target] = module(name=value, ...)`, or `return <var>`.  Anything
// after the return line is ignored with a warning (completions can overrun
// the stop sequence).  Throws ParseError for malformed lines and
// ValidationError for registry violations (unknown module, missing required
// arg, literal kind mismatch, use before define).
Program parse(const std::string& text, const Registry& registry);

// Substring test for the fast-path marker ("fast_reasoning"/"fast_think") on
// raw completion text, applied before any parsing.
bool contains_fast_marker(const std::string& text);

// Canonical source text: planning lines, statements, then the return line.
// render(parse(t)) re-parses to an equal Program for grammar-valid t.
std::string render(const Program& program);

// Returns a copy of `program` with exactly one argument literal replaced (or
// added, when the statement relied on the default).  The input is untouched.
// Throws ValidationError when the binding is out of range, names a
// non-searchable param, or the value kind mismatches.
Program substitute(const Program& program, const ParamBinding& binding, const Registry& registry);

// All single-parameter variants reachable from `program`: for each statement
// in order, for each searchable param of its module in signature order, one
// binding per candidate value in declared order.
std::vector<ParamBinding> enumerate_bindings(const Program& program, const Registry& registry);

}  // namespace vispr
