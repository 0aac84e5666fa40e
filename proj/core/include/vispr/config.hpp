#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vispr/registry.hpp"
#include "vispr/search.hpp"
#include "vispr/world.hpp"

namespace vispr {

enum class BackendMode { Simulated, Remote };

const char* to_string(BackendMode m);
std::optional<BackendMode> backend_mode_from_string(const std::string& s);

struct RemoteEndpoints {
  std::string backend_url;
  std::string planner_url;
  double timeout_s = 30.0;
  int max_in_flight = 8;
};

struct Config {
  BackendMode backend_mode = BackendMode::Simulated;
  RemoteEndpoints remote;
  double theta = 0.75;
  double tau = 0.75;
  SearchConfig search;
  std::optional<std::filesystem::path> registry_file;
  std::optional<std::filesystem::path> corpus_dir;
  CorpusSpec generation;  // used when corpus_dir is absent
  std::uint64_t seed = 1;
  std::filesystem::path run_log = "runs.jsonl";
  int parallelism = 1;
  double statement_timeout_s = 60.0;
  int service_port = 8900;
  int service_queue = 64;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Additionally checks that enabled search params exist as searchable
  // parameters of some registered module.
  void validate(const Registry& registry) const;
};

nlohmann::json to_json(const Config& c);
Config config_from_json(const nlohmann::json& j);

Config load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const Config& c);

}  // namespace vispr
