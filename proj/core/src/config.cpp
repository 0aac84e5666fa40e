#include "vispr/config.hpp"

#include <fstream>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

using nlohmann::json;

}  // namespace

const char* to_string(BackendMode m) {
  return m == BackendMode::Simulated ? "simulated" : "remote";
}

std::optional<BackendMode> backend_mode_from_string(const std::string& s) {
  if (s == "simulated") return BackendMode::Simulated;
  if (s == "remote") return BackendMode::Remote;
  return std::nullopt;
}

void Config::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must be in (0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must be in (0, 1)");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (search.parallelism < 1) throw ConfigError("search.parallelism must be >= 1");
  if (statement_timeout_s < 0.0) throw ConfigError("statement_timeout_s must be >= 0");
  if (backend_mode == BackendMode::Remote) {
    if (remote.backend_url.empty()) throw ConfigError("remote.backend_url required in remote mode");
    if (remote.planner_url.empty()) throw ConfigError("remote.planner_url required in remote mode");
    if (remote.timeout_s <= 0.0) throw ConfigError("remote.timeout_s must be > 0");
    if (remote.max_in_flight < 1) throw ConfigError("remote.max_in_flight must be >= 1");
  }
  if (service_port < 1 || service_port > 65535) throw ConfigError("service_port out of range");
  if (service_queue < 1) throw ConfigError("service_queue must be >= 1");
}

void Config::validate(const Registry& registry) const {
  validate();
  for (const auto& param : search.enabled_params) {
    bool known = false;
    for (const auto& sig : registry.modules()) {
      for (const auto& p : sig.params) {
        if (p.name == param && !p.search_space.empty()) {
          known = true;
          break;
        }
      }
      if (known) break;
    }
    if (!known) {
      throw ConfigError("search.enabled_params: '" + param +
                        "' is not a searchable parameter of any registered module");
    }
  }
}

json to_json(const Config& c) {
  return json{
      {"backend",
       json{{"mode", to_string(c.backend_mode)},
            {"backend_url", c.remote.backend_url},
            {"planner_url", c.remote.planner_url},
            {"timeout_s", c.remote.timeout_s},
            {"max_in_flight", c.remote.max_in_flight}}},
      {"theta", c.theta},
      {"tau", c.tau},
      {"search",
       json{{"enabled_params", c.search.enabled_params},
            {"aggregation", to_string(c.search.aggregation)},
            {"parallelism", c.search.parallelism},
            {"memoize_base", c.search.memoize_base}}},
      {"registry_file", c.registry_file ? json(c.registry_file->string()) : json(nullptr)},
      {"corpus_dir", c.corpus_dir ? json(c.corpus_dir->string()) : json(nullptr)},
      {"generation", corpus_spec_to_json(c.generation)},
      {"seed", c.seed},
      {"run_log", c.run_log.string()},
      {"parallelism", c.parallelism},
      {"statement_timeout_s", c.statement_timeout_s},
      {"service", json{{"port", c.service_port}, {"queue", c.service_queue}}}};
}

Config config_from_json(const json& j) {
  Config c;
  if (j.contains("backend")) {
    const json& b = j.at("backend");
    if (b.contains("mode")) {
      auto mode = backend_mode_from_string(b.at("mode").get<std::string>());
      if (!mode) throw ConfigError("backend.mode must be 'simulated' or 'remote'");
      c.backend_mode = *mode;
    }
    c.remote.backend_url = b.value("backend_url", c.remote.backend_url);
    c.remote.planner_url = b.value("planner_url", c.remote.planner_url);
    c.remote.timeout_s = b.value("timeout_s", c.remote.timeout_s);
    c.remote.max_in_flight = b.value("max_in_flight", c.remote.max_in_flight);
  }
  c.theta = j.value("theta", c.theta);
  c.tau = j.value("tau", c.tau);
  if (j.contains("search")) {
    const json& s = j.at("search");
    c.search.enabled_params =
        s.value("enabled_params", c.search.enabled_params);
    if (s.contains("aggregation")) {
      auto agg = aggregation_from_string(s.at("aggregation").get<std::string>());
      if (!agg) throw ConfigError("search.aggregation must be 'confidence' or 'voting'");
      c.search.aggregation = *agg;
    }
    c.search.parallelism = s.value("parallelism", c.search.parallelism);
    c.search.memoize_base = s.value("memoize_base", c.search.memoize_base);
  }
  if (j.contains("registry_file") && !j.at("registry_file").is_null()) {
    c.registry_file = std::filesystem::path(j.at("registry_file").get<std::string>());
  }
  if (j.contains("corpus_dir") && !j.at("corpus_dir").is_null()) {
    c.corpus_dir = std::filesystem::path(j.at("corpus_dir").get<std::string>());
  }
  if (j.contains("generation")) c.generation = corpus_spec_from_json(j.at("generation"));
  c.seed = j.value("seed", c.seed);
  if (j.contains("run_log")) c.run_log = j.at("run_log").get<std::string>();
  c.parallelism = j.value("parallelism", c.parallelism);
  c.statement_timeout_s = j.value("statement_timeout_s", c.statement_timeout_s);
  if (j.contains("service")) {
    c.service_port = j.at("service").value("port", c.service_port);
    c.service_queue = j.at("service").value("queue", c.service_queue);
  }
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const Config& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config '" + path.string() + "'");
  out << to_json(c).dump(2) << "\n";
}

}  // namespace vispr
