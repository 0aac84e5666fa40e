#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vispr/types.hpp"

namespace vispr {

// Kinds a value can have in the program language. The first block can be
// written as literals; the second only arises as module output.
enum class ValueKind {
  String,
  Integer,
  Float,
  Seconds,
  FrameSet,
  Box,
  Choices,
  Text,
  // produced-only kinds
  Clips,
  Spans,
  Range,
  Segments,
  Detections,
  Texts,
  Answer,
  Confidence,
};

const char* to_string(ValueKind k);
std::optional<ValueKind> value_kind_from_string(const std::string& s);

// A literal as written in program text: "str", 42, 0.25, [a, b] or a box.
struct Literal {
  using Storage = std::variant<std::string, std::int64_t, double, Box, std::vector<std::string>>;
  Storage v;

  Literal() : v(std::int64_t{0}) {}
  explicit Literal(Storage s) : v(std::move(s)) {}
  static Literal str(std::string s) { return Literal(Storage(std::move(s))); }
  static Literal integer(std::int64_t i) { return Literal(Storage(i)); }
  static Literal real(double d) { return Literal(Storage(d)); }
  static Literal box(Box b) { return Literal(Storage(b)); }
  static Literal list(std::vector<std::string> xs) { return Literal(Storage(std::move(xs))); }

  bool operator==(const Literal&) const = default;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_real() const { return std::holds_alternative<double>(v); }
  bool is_number() const { return is_integer() || is_real(); }

  // Numeric view; throws DomainError for non-numeric literals.
  double as_number() const;
  std::int64_t as_integer() const;
  const std::string& as_string() const;

  // Source form, e.g. "abc" -> "\"abc\"", 2.5 -> "2.5".
  std::string render() const;

  // Whether this literal is acceptable for a parameter of the given kind.
  // Integers are acceptable where floats or seconds are expected.
  bool matches_kind(ValueKind k) const;
};

struct ParamSpec {
  std::string name;
  ValueKind kind = ValueKind::String;
  bool required = true;
  std::optional<Literal> default_value;
  std::vector<Literal> search_space;  // nonempty => searchable

  bool searchable() const { return !search_space.empty(); }
};

struct ModuleSignature {
  std::string name;   // canonical snake_case identifier
  std::string alias;  // CamelCase display name
  std::vector<ParamSpec> params;
  std::vector<ValueKind> returns;

  const ParamSpec* find_param(const std::string& param_name) const;
};

// The module registry: built once, read-only afterwards. The default
// registry holds the 17 vision modules; a config file may override
// defaults and search spaces without code changes.
class Registry {
public:
  static Registry builtin();

  // Load from a JSON config (full module definitions); validates invariants.
  static Registry from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Lookup by canonical name or CamelCase alias; nullptr when unknown.
  const ModuleSignature* find(const std::string& name_or_alias) const;

  const std::vector<ModuleSignature>& modules() const { return modules_; }
  std::size_t size() const { return modules_.size(); }

private:
  void add(ModuleSignature sig);
  void index();

  std::vector<ModuleSignature> modules_;
  std::map<std::string, std::size_t> by_name_;
};

}  // namespace vispr
