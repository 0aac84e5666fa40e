#pragma once

#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vispr/errors.hpp"

namespace vispr::detail {

inline std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

inline void reply_json(httplib::Response& res, const nlohmann::json& body) {
  res.set_content(body.dump(), "application/json");
}

inline nlohmann::json post_json(const std::string& base_url, double timeout_s,
                                const std::string& path, const nlohmann::json& body,
                                const char* who) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(to_ms(timeout_s));
  cli.set_read_timeout(to_ms(timeout_s));
  cli.set_write_timeout(to_ms(timeout_s));
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) {
    throw BackendError(std::string(who) + " unreachable at " + base_url + path + " (" +
                       httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    throw BackendError(std::string(who) + " returned HTTP " + std::to_string(res->status) +
                       " for " + path);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string(who) + " sent malformed JSON: " + e.what());
  }
}

inline bool get_healthz(const std::string& base_url, double timeout_s) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(to_ms(timeout_s));
  cli.set_read_timeout(to_ms(timeout_s));
  auto res = cli.Get("/healthz");
  return res && res->status == 200;
}

// Owns an httplib server plus its listener thread.  Handlers are registered
// before start(); /healthz is installed here unless the owner registered one.
struct HttpHost {
  httplib::Server server;
  std::thread thread;
  std::string host;
  int requested_port = 0;
  int bound_port = 0;
  bool started = false;
  bool default_healthz = true;

  void start(const char* who) {
    if (started) return;
    if (default_healthz) {
      server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        reply_json(res, nlohmann::json{{"status", "ok"}});
      });
    }
    if (requested_port == 0) {
      bound_port = server.bind_to_any_port(host);
      if (bound_port < 0) throw BackendError(std::string(who) + ": cannot bind to any port");
    } else {
      if (!server.bind_to_port(host, requested_port)) {
        throw BackendError(std::string(who) + ": cannot bind " + host + ":" +
                           std::to_string(requested_port));
      }
      bound_port = requested_port;
    }
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    started = true;
  }

  void stop() {
    if (!started) return;
    server.stop();
    if (thread.joinable()) thread.join();
    started = false;
  }

  ~HttpHost() { stop(); }
};

}  // namespace vispr::detail
