#include "vispr/metrics.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

using nlohmann::json;

constexpr const char* kBucketNames[] = {"short", "medium", "long"};

std::string pct(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << fraction * 100.0 << "%";
  return os.str();
}

std::string fixed1(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << v;
  return os.str();
}

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

void row(std::ostringstream& os, const std::string& name, const PathStats& s) {
  os << std::left << std::setw(9) << name << std::right << std::setw(8) << s.samples
     << std::setw(10) << pct(s.accuracy()) << std::setw(10) << fixed1(s.mean_output_length());
  for (const auto& b : s.buckets) {
    os << std::setw(12) << (std::to_string(b.correct) + "/" + std::to_string(b.samples));
  }
  os << "\n";
}

}  // namespace

json to_json(const GapReport& g) {
  return json{{"mean_correct", g.mean_correct},
              {"mean_incorrect", g.mean_incorrect},
              {"delta", g.delta}};
}

GapReport gap_report_from_json(const json& j) {
  GapReport g;
  g.mean_correct = j.at("mean_correct").get<double>();
  g.mean_incorrect = j.at("mean_incorrect").get<double>();
  g.delta = j.at("delta").get<double>();
  return g;
}

json to_json(const ThresholdPoint& p) {
  return json{{"threshold", p.threshold},
              {"accuracy", p.accuracy ? json(*p.accuracy) : json(nullptr)},
              {"coverage", p.coverage}};
}

ThresholdPoint threshold_point_from_json(const json& j) {
  ThresholdPoint p;
  p.threshold = j.at("threshold").get<double>();
  if (!j.at("accuracy").is_null()) p.accuracy = j.at("accuracy").get<double>();
  p.coverage = j.at("coverage").get<double>();
  return p;
}

json to_json(const PathStats& s) {
  json buckets;
  for (std::size_t i = 0; i < s.buckets.size(); ++i) {
    buckets[kBucketNames[i]] = json{{"samples", s.buckets[i].samples},
                                    {"correct", s.buckets[i].correct},
                                    {"accuracy", s.buckets[i].accuracy()}};
  }
  return json{{"samples", s.samples},
              {"correct", s.correct},
              {"accuracy", s.accuracy()},
              {"output_length_sum", s.output_length_sum},
              {"mean_output_length", s.mean_output_length()},
              {"buckets", std::move(buckets)}};
}

PathStats path_stats_from_json(const json& j) {
  PathStats s;
  s.samples = j.at("samples").get<int>();
  s.correct = j.at("correct").get<int>();
  s.output_length_sum = j.at("output_length_sum").get<double>();
  const json& buckets = j.at("buckets");
  for (std::size_t i = 0; i < s.buckets.size(); ++i) {
    const json& b = buckets.at(kBucketNames[i]);
    s.buckets[i].samples = b.at("samples").get<int>();
    s.buckets[i].correct = b.at("correct").get<int>();
  }
  return s;
}

json to_json(const EvalReport& r) {
  json curve = json::array();
  for (const auto& p : r.curve) curve.push_back(to_json(p));
  return json{{"theta", r.theta},
              {"mode", to_string(r.mode)},
              {"paths",
               json{{"fast", to_json(r.fast)},
                    {"slow", to_json(r.slow)},
                    {"overall", to_json(r.overall)}}},
              {"path_counts", r.path_counts},
              {"gap", r.gap ? to_json(*r.gap) : json()},
              {"curve", std::move(curve)}};
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  r.theta = j.at("theta").get<double>();
  auto mode = eval_mode_from_string(j.at("mode").get<std::string>());
  if (!mode) throw ValidationError("unknown eval mode");
  r.mode = *mode;
  r.fast = path_stats_from_json(j.at("paths").at("fast"));
  r.slow = path_stats_from_json(j.at("paths").at("slow"));
  r.overall = path_stats_from_json(j.at("paths").at("overall"));
  r.path_counts = j.at("path_counts").get<std::map<std::string, int>>();
  if (!j.at("gap").is_null()) r.gap = gap_report_from_json(j.at("gap"));
  for (const auto& p : j.at("curve")) r.curve.push_back(threshold_point_from_json(p));
  return r;
}

std::string render_report_text(const EvalReport& r) {
  std::ostringstream os;
  os << "mode=" << to_string(r.mode) << " theta=" << r.theta << "\n";
  os << std::left << std::setw(9) << "path" << std::right << std::setw(8) << "samples"
     << std::setw(10) << "accuracy" << std::setw(10) << "out_len";
  for (const char* b : kBucketNames) os << std::setw(12) << b;
  os << "\n";
  row(os, "fast", r.fast);
  row(os, "slow", r.slow);
  row(os, "overall", r.overall);
  os << "routes:";
  for (const auto& [path, count] : r.path_counts) os << " " << path << "=" << count;
  os << "\n";
  if (r.gap) {
    os << "confidence gap: correct=" << fixed4(r.gap->mean_correct)
       << " incorrect=" << fixed4(r.gap->mean_incorrect) << " delta=" << fixed4(r.gap->delta)
       << "\n";
  } else {
    os << "confidence gap: n/a\n";
  }
  os << "threshold curve:\n";
  for (const auto& p : r.curve) {
    os << "  >=" << fixed4(p.threshold)
       << "  accuracy=" << (p.accuracy ? fixed4(*p.accuracy) : std::string("n/a"))
       << "  coverage=" << fixed4(p.coverage) << "\n";
  }
  return os.str();
}

void write_report(const std::filesystem::path& path, const EvalReport& r) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write report '" + path.string() + "'");
  out << to_json(r).dump(2) << "\n";
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open report '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("report '" + path.string() + "': " + e.what());
  }
  return eval_report_from_json(j);
}

}  // namespace vispr
