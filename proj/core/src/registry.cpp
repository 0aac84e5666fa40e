#include "vispr/registry.hpp"

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

const std::pair<ValueKind, const char*> kKindNames[] = {
    {ValueKind::String, "string"},       {ValueKind::Integer, "integer"},
    {ValueKind::Float, "float"},         {ValueKind::Seconds, "seconds"},
    {ValueKind::FrameSet, "frames"},     {ValueKind::Box, "box"},
    {ValueKind::Choices, "choices"},     {ValueKind::Text, "text"},
    {ValueKind::Clips, "clips"},         {ValueKind::Spans, "spans"},
    {ValueKind::Range, "range"},         {ValueKind::Segments, "segments"},
    {ValueKind::Detections, "detections"}, {ValueKind::Texts, "texts"},
    {ValueKind::Answer, "answer"},       {ValueKind::Confidence, "confidence"},
};

std::string render_double(double d) {
  // Shortest representation that round-trips; integral values keep a ".0"
  // so the literal stays float-kinded on re-parse.
  std::ostringstream os;
  os.precision(17);
  os << d;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

}  // namespace

const char* to_string(ValueKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::optional<ValueKind> value_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

double Literal::as_number() const {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw DomainError("literal is not numeric: " + render());
}

std::int64_t Literal::as_integer() const {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw DomainError("literal is not an integer: " + render());
}

const std::string& Literal::as_string() const {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw DomainError("literal is not a string: " + render());
}

std::string Literal::render() const {
  struct Visitor {
    std::string operator()(const std::string& s) const {
      std::string out = "\"";
      for (char c : s) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          default: out += c;
        }
      }
      out += '"';
      return out;
    }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return render_double(d); }
    std::string operator()(const Box& b) const {
      return "[" + render_double(b.x0) + ", " + render_double(b.y0) + ", " + render_double(b.x1) +
             ", " + render_double(b.y1) + "]";
    }
    std::string operator()(const std::vector<std::string>& xs) const {
      std::string out = "[";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += Visitor{}(xs[i]);
      }
      out += ']';
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

bool Literal::matches_kind(ValueKind k) const {
  switch (k) {
    case ValueKind::String:
    case ValueKind::Text:
      return is_string();
    case ValueKind::Integer:
      return is_integer();
    case ValueKind::Float:
    case ValueKind::Seconds:
      return is_number();
    case ValueKind::Box:
      return std::holds_alternative<Box>(v);
    case ValueKind::Choices:
      return std::holds_alternative<std::vector<std::string>>(v);
    default:
      return false;  // produced-only kinds have no literal form
  }
}

const ParamSpec* ModuleSignature::find_param(const std::string& param_name) const {
  for (const auto& p : params) {
    if (p.name == param_name) return &p;
  }
  return nullptr;
}

void Registry::add(ModuleSignature sig) { modules_.push_back(std::move(sig)); }

void Registry::index() {
  by_name_.clear();
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    const auto& m = modules_[i];
    if (by_name_.count(m.name)) {
      throw ValidationError("registry: duplicate module name '" + m.name + "'");
    }
    by_name_[m.name] = i;
    if (!m.alias.empty()) {
      if (by_name_.count(m.alias)) {
        throw ValidationError("registry: duplicate module alias '" + m.alias + "'");
      }
      by_name_[m.alias] = i;
    }
    for (const auto& p : m.params) {
      for (const auto& cand : p.search_space) {
        if (!cand.matches_kind(p.kind)) {
          throw ValidationError("registry: search candidate " + cand.render() + " for " + m.name +
                                "." + p.name + " does not match kind " + to_string(p.kind));
        }
      }
      if (p.default_value && !p.default_value->matches_kind(p.kind)) {
        throw ValidationError("registry: default " + p.default_value->render() + " for " + m.name +
                              "." + p.name + " does not match kind " + to_string(p.kind));
      }
    }
  }
}

const ModuleSignature* Registry::find(const std::string& name_or_alias) const {
  auto it = by_name_.find(name_or_alias);
  if (it == by_name_.end()) return nullptr;
  return &modules_[it->second];
}

Registry Registry::builtin() {
  using VK = ValueKind;
  Registry r;

  auto p = [](std::string name, VK kind, bool required = true,
              std::optional<Literal> def = std::nullopt,
              std::vector<Literal> space = {}) {
    ParamSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.required = required;
    s.default_value = std::move(def);
    s.search_space = std::move(space);
    return s;
  };
  auto ints = [](std::initializer_list<std::int64_t> xs) {
    std::vector<Literal> out;
    for (auto x : xs) out.push_back(Literal::integer(x));
    return out;
  };
  auto secs = [](std::initializer_list<double> xs) {
    std::vector<Literal> out;
    for (auto x : xs) out.push_back(Literal::real(x));
    return out;
  };

  r.add({"get_clips",
         "GetClips",
         {p("video_path", VK::String), p("query", VK::Text),
          p("top_k", VK::Integer, false, Literal::integer(3), ints({1, 3, 5}))},
         {VK::Clips}});
  r.add({"get_subtitles",
         "GetSubtitles",
         {p("video_path", VK::String), p("query", VK::Text),
          p("top_k", VK::Integer, false, Literal::integer(3), ints({1, 3, 5}))},
         {VK::Spans}});
  r.add({"trim_before",
         "TrimBefore",
         {p("video_path", VK::String), p("timestamp", VK::Seconds),
          p("intervals", VK::Seconds, false, Literal::real(20), secs({10, 20, 30, 60}))},
         {VK::Range}});
  r.add({"trim_after",
         "TrimAfter",
         {p("video_path", VK::String), p("timestamp", VK::Seconds),
          p("intervals", VK::Seconds, false, Literal::real(20), secs({10, 20, 30, 60}))},
         {VK::Range}});
  r.add({"trim_range",
         "TrimRange",
         {p("video_path", VK::String), p("start", VK::Seconds), p("end", VK::Seconds)},
         {VK::Range}});
  r.add({"query_mc",
         "QueryMC",
         {p("frames", VK::FrameSet), p("query", VK::Text), p("choices", VK::Choices)},
         {VK::Answer}});
  r.add({"query_yn",
         "QueryYN",
         {p("frames", VK::FrameSet), p("query", VK::Text)},
         {VK::Answer, VK::Confidence}});
  r.add({"run_ocr", "RunOCR", {p("frame", VK::FrameSet)}, {VK::Text}});
  r.add({"detect_object",
         "DetectObject",
         {p("frame", VK::FrameSet), p("text", VK::Text),
          p("text_thr", VK::Float, false, Literal::real(0.25),
            {Literal::real(0.25), Literal::real(0.50), Literal::real(0.70)}),
          p("box_thr", VK::Float, false, Literal::real(0.25))},
         {VK::Detections}});
  r.add({"get_subs_range",
         "GetSubsRange",
         {p("video_path", VK::String), p("start", VK::Seconds), p("end", VK::Seconds)},
         {VK::Spans}});
  r.add({"get_caps_range",
         "GetCapsRange",
         {p("video_path", VK::String), p("start", VK::Seconds), p("end", VK::Seconds)},
         {VK::Spans}});
  r.add({"get_subtitle_hint",
         "GetSubtitleHint",
         {p("video_path", VK::String), p("query", VK::Text)},
         {VK::Text}});
  r.add({"crop", "Crop", {p("frame", VK::FrameSet), p("box", VK::Box)}, {VK::FrameSet}});
  r.add({"extract_frames",
         "ExtractFrames",
         {p("video_path", VK::String),
          p("num_frames", VK::Integer, false, Literal::integer(16), ints({8, 16, 32, 64}))},
         {VK::FrameSet}});
  r.add({"split_video", "SplitVideo", {p("video_path", VK::String)}, {VK::Segments}});
  r.add({"split_event", "SplitEvent", {p("text", VK::Text)}, {VK::Texts}});
  r.add({"fast_think",
         "FastThink",
         {p("video_path", VK::String), p("query", VK::Text),
          p("choices", VK::Choices, false, Literal::list({}))},
         {VK::Confidence, VK::Answer}});

  r.index();
  return r;
}

nlohmann::json Registry::to_json() const {
  nlohmann::json mods = nlohmann::json::array();
  auto lit_json = [](const Literal& l) {
    nlohmann::json j;
    if (const auto* s = std::get_if<std::string>(&l.v)) {
      j = *s;
    } else if (const auto* i = std::get_if<std::int64_t>(&l.v)) {
      j = *i;
    } else if (const auto* d = std::get_if<double>(&l.v)) {
      j = *d;
    } else if (const auto* b = std::get_if<Box>(&l.v)) {
      j = nlohmann::json::array({b->x0, b->y0, b->x1, b->y1});
    } else if (const auto* xs = std::get_if<std::vector<std::string>>(&l.v)) {
      j = *xs;
    }
    return j;
  };
  for (const auto& m : modules_) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : m.params) {
      nlohmann::json pj{{"name", p.name}, {"kind", to_string(p.kind)}, {"required", p.required}};
      if (p.default_value) pj["default"] = lit_json(*p.default_value);
      if (!p.search_space.empty()) {
        nlohmann::json space = nlohmann::json::array();
        for (const auto& c : p.search_space) space.push_back(lit_json(c));
        pj["search_space"] = space;
      }
      params.push_back(pj);
    }
    nlohmann::json returns = nlohmann::json::array();
    for (auto k : m.returns) returns.push_back(to_string(k));
    mods.push_back(
        {{"name", m.name}, {"alias", m.alias}, {"params", params}, {"returns", returns}});
  }
  return nlohmann::json{{"schema_version", 1}, {"modules", mods}};
}

Registry Registry::from_json(const nlohmann::json& j) {
  auto lit_from = [](const nlohmann::json& v, ValueKind kind) -> Literal {
    switch (kind) {
      case ValueKind::String:
      case ValueKind::Text:
        return Literal::str(v.get<std::string>());
      case ValueKind::Integer:
        return Literal::integer(v.get<std::int64_t>());
      case ValueKind::Float:
      case ValueKind::Seconds:
        if (v.is_number_integer()) return Literal::integer(v.get<std::int64_t>());
        return Literal::real(v.get<double>());
      case ValueKind::Box: {
        auto a = v.get<std::vector<double>>();
        if (a.size() != 4) throw ValidationError("registry: box literal needs 4 numbers");
        return Literal::box(Box{a[0], a[1], a[2], a[3]});
      }
      case ValueKind::Choices:
        return Literal::list(v.get<std::vector<std::string>>());
      default:
        throw ValidationError("registry: literal not allowed for produced-only kind");
    }
  };

  Registry r;
  for (const auto& mj : j.at("modules")) {
    ModuleSignature m;
    m.name = mj.at("name").get<std::string>();
    m.alias = mj.value("alias", std::string{});
    for (const auto& pj : mj.at("params")) {
      ParamSpec p;
      p.name = pj.at("name").get<std::string>();
      auto kind = value_kind_from_string(pj.at("kind").get<std::string>());
      if (!kind) throw ValidationError("registry: unknown kind for param " + p.name);
      p.kind = *kind;
      p.required = pj.value("required", true);
      if (pj.contains("default")) p.default_value = lit_from(pj.at("default"), p.kind);
      if (pj.contains("search_space")) {
        for (const auto& c : pj.at("search_space")) p.search_space.push_back(lit_from(c, p.kind));
      }
      m.params.push_back(std::move(p));
    }
    for (const auto& rk : mj.at("returns")) {
      auto kind = value_kind_from_string(rk.get<std::string>());
      if (!kind) throw ValidationError("registry: unknown return kind in " + m.name);
      m.returns.push_back(*kind);
    }
    r.add(std::move(m));
  }
  r.index();
  return r;
}

}  // namespace vispr
