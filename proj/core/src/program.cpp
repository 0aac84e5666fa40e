#include "vispr/program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Single-line cursor.  The grammar is line oriented, so the parser never has
// to look across newlines.
struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line;

  explicit Cursor(const std::string& text, int line_no) : s(text), line(line_no) {}

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() const { return pos < s.size() ? s[pos] : '\0'; }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!eat(c)) {
      throw ParseError(std::string("expected '") + c + "' " + what, line);
    }
  }

  std::string ident() {
    skip_ws();
    if (pos >= s.size() || !is_ident_start(s[pos])) {
      throw ParseError("expected identifier", line);
    }
    std::size_t start = pos;
    while (pos < s.size() && is_ident_char(s[pos])) ++pos;
    return s.substr(start, pos - start);
  }

  std::string quoted_string() {
    // caller consumed the opening quote
    std::string out;
    while (pos < s.size()) {
      char c = s[pos++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos >= s.size()) break;
        char e = s[pos++];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default:
            throw ParseError(std::string("unsupported escape '\\") + e + "'", line);
        }
      } else {
        out += c;
      }
    }
    throw ParseError("unterminated string literal", line);
  }

  Literal number() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
    bool is_float = false;
    while (pos < s.size()) {
      char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos;
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        ++pos;
        if ((c == 'e' || c == 'E') && pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      } else {
        break;
      }
    }
    std::string tok = s.substr(start, pos - start);
    if (tok.empty() || tok == "+" || tok == "-") {
      throw ParseError("expected number", line);
    }
    if (!is_float) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("bad integer literal '" + tok + "'", line);
      }
      return Literal::integer(v);
    }
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return Literal::real(v);
    } catch (const std::exception&) {
      throw ParseError("bad float literal '" + tok + "'", line);
    }
  }

  // `[..]` holds either quoted strings (choice list) or exactly four numbers
  // (a box).  Mixing the two is malformed.
  Literal bracket_list() {
    skip_ws();
    std::vector<std::string> strings;
    std::vector<double> numbers;
    if (eat(']')) return Literal::list({});
    while (true) {
      skip_ws();
      if (peek() == '"') {
        ++pos;
        strings.push_back(quoted_string());
      } else {
        numbers.push_back(number().as_number());
      }
      if (eat(']')) break;
      expect(',', "in list literal");
    }
    if (!strings.empty() && !numbers.empty()) {
      throw ParseError("list literal mixes strings and numbers", line);
    }
    if (!numbers.empty()) {
      if (numbers.size() != 4) {
        throw ParseError("numeric list literal must have 4 elements (a box)", line);
      }
      return Literal::box({numbers[0], numbers[1], numbers[2], numbers[3]});
    }
    return Literal::list(std::move(strings));
  }

  ArgValue value() {
    skip_ws();
    char c = peek();
    if (c == '"') {
      ++pos;
      return ArgValue::literal(Literal::str(quoted_string()));
    }
    if (c == '[') {
      ++pos;
      return ArgValue::literal(bracket_list());
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
      return ArgValue::literal(number());
    }
    if (is_ident_start(c)) {
      return ArgValue::variable(ident());
    }
    throw ParseError("expected literal or variable", line);
  }
};

std::string strip_comment(const std::string& line) {
  std::size_t i = 1;  // past '#'
  if (i < line.size() && line[i] == ' ') ++i;
  return line.substr(i);
}

void validate_statement(const Statement& st, const ModuleSignature& sig,
                        const std::set<std::string>& defined, int line) {
  const std::string where = " in call to '" + sig.name + "' (line " + std::to_string(line) + ")";
  if (st.targets.size() > sig.returns.size()) {
    throw ValidationError("too many targets (" + std::to_string(st.targets.size()) + ") for '" +
                          sig.name + "' returning " + std::to_string(sig.returns.size()) +
                          " value(s) (line " + std::to_string(line) + ")");
  }
  std::set<std::string> seen;
  for (const auto& arg : st.args) {
    if (!seen.insert(arg.name).second) {
      throw ValidationError("duplicate argument '" + arg.name + "'" + where);
    }
    const ParamSpec* param = sig.find_param(arg.name);
    if (!param) {
      throw ValidationError("unknown argument '" + arg.name + "'" + where);
    }
    if (arg.value.is_var) {
      if (!defined.count(arg.value.var)) {
        throw ValidationError("variable '" + arg.value.var + "' used before definition" + where);
      }
    } else if (!arg.value.lit.matches_kind(param->kind)) {
      throw ValidationError("argument '" + arg.name + "' expects " + to_string(param->kind) +
                            ", got " + arg.value.lit.render() + where);
    }
  }
  for (const auto& param : sig.params) {
    if (param.required && !param.default_value && !seen.count(param.name)) {
      throw ValidationError("missing required argument '" + param.name + "'" + where);
    }
  }
}

}  // namespace

bool contains_fast_marker(const std::string& text) {
  return text.find(kFastMarker) != std::string::npos ||
         text.find(kFastModule) != std::string::npos;
}

const std::vector<std::string>& context_variables() {
  static const std::vector<std::string> kVars = {"v",     "q",        "video_path",
                                                 "query", "question", "choices"};
  return kVars;
}

bool is_context_variable(const std::string& name) {
  const auto& vars = context_variables();
  return std::find(vars.begin(), vars.end(), name) != vars.end();
}

const ArgValue* Statement::find_arg(const std::string& name) const {
  for (const auto& arg : args) {
    if (arg.name == name) return &arg.value;
  }
  return nullptr;
}

Program parse(const std::string& text, const Registry& registry) {
  Program prog;
  prog.has_fast_marker = contains_fast_marker(text);

  std::set<std::string> defined(context_variables().begin(), context_variables().end());

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = raw;
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;

    if (prog.terminated) {
      prog.warnings.push_back("line " + std::to_string(line_no) +
                              ": text after return ignored");
      continue;
    }

    if (line[first] == '#') {
      prog.planning_text.push_back(strip_comment(line.substr(first)));
      continue;
    }

    Cursor cur(line, line_no);
    std::string head = cur.ident();
    if (head == "return") {
      std::string var = cur.ident();
      prog.terminated = true;
      prog.return_variable = var;
      if (!cur.done()) {
        prog.warnings.push_back("line " + std::to_string(line_no) +
                                ": trailing text after return ignored");
      }
      continue;
    }

    Statement st;
    st.source_span = {line_no, line_no};
    st.targets.push_back(head);
    if (cur.eat(',')) {
      st.targets.push_back(cur.ident());
    }
    cur.expect('=', "after target list");
    std::string module_name = cur.ident();
    cur.expect('(', "after module name");
    if (!cur.eat(')')) {
      while (true) {
        Arg arg;
        arg.name = cur.ident();
        cur.expect('=', "after argument name");
        arg.value = cur.value();
        st.args.push_back(std::move(arg));
        if (cur.eat(')')) break;
        cur.expect(',', "between arguments");
      }
    }
    if (!cur.done()) {
      throw ParseError("unexpected text after call", line_no);
    }

    const ModuleSignature* sig = registry.find(module_name);
    if (!sig) {
      throw ValidationError("unknown module '" + module_name + "' (line " +
                            std::to_string(line_no) + ")");
    }
    st.module = sig->name;
    validate_statement(st, *sig, defined, line_no);
    for (const auto& t : st.targets) defined.insert(t);
    prog.statements.push_back(std::move(st));
  }
  return prog;
}

std::string render(const Program& program) {
  std::string out;
  for (const auto& note : program.planning_text) {
    out += "# " + note + "\n";
  }
  for (const auto& st : program.statements) {
    for (std::size_t i = 0; i < st.targets.size(); ++i) {
      if (i) out += ", ";
      out += st.targets[i];
    }
    out += " = " + st.module + "(";
    for (std::size_t i = 0; i < st.args.size(); ++i) {
      if (i) out += ", ";
      out += st.args[i].name + "=" + st.args[i].value.render();
    }
    out += ")\n";
  }
  if (program.terminated) {
    out += "return " + program.return_variable.value_or("answer") + "\n";
  }
  return out;
}

Program substitute(const Program& program, const ParamBinding& binding,
                   const Registry& registry) {
  if (binding.statement_index >= program.statements.size()) {
    throw ValidationError("binding statement index " + std::to_string(binding.statement_index) +
                          " out of range");
  }
  const Statement& st = program.statements[binding.statement_index];
  const ModuleSignature* sig = registry.find(st.module);
  if (!sig) {
    throw ValidationError("unknown module '" + st.module + "'");
  }
  const ParamSpec* param = sig->find_param(binding.param_name);
  if (!param || !param->searchable()) {
    throw ValidationError("param '" + binding.param_name + "' of '" + st.module +
                          "' is not searchable");
  }
  if (!binding.value.matches_kind(param->kind)) {
    throw ValidationError("binding value " + binding.value.render() + " does not match kind " +
                          to_string(param->kind) + " of '" + binding.param_name + "'");
  }

  Program out = program;
  Statement& target = out.statements[binding.statement_index];
  for (auto& arg : target.args) {
    if (arg.name == binding.param_name) {
      arg.value = ArgValue::literal(binding.value);
      return out;
    }
  }
  target.args.push_back({binding.param_name, ArgValue::literal(binding.value)});
  return out;
}

std::vector<ParamBinding> enumerate_bindings(const Program& program, const Registry& registry) {
  std::vector<ParamBinding> out;
  for (std::size_t i = 0; i < program.statements.size(); ++i) {
    const ModuleSignature* sig = registry.find(program.statements[i].module);
    if (!sig) continue;
    for (const auto& param : sig->params) {
      if (!param.searchable()) continue;
      for (const auto& value : param.search_space) {
        out.push_back({i, param.name, value});
      }
    }
  }
  return out;
}

}  // namespace vispr
