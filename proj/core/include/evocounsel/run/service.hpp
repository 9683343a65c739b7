#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evocounsel/run/config.hpp"

namespace evocounsel::run {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  /// Run directories found here (one level deep) are served read-only, and
  /// operator runs started with POST /runs are created here.
  std::filesystem::path runs_root;
  /// Additional run directories to serve.
  std::vector<std::filesystem::path> run_dirs;
  /// Backends, card and seed tree for live sessions. Without it POST
  /// /sessions answers 503.
  std::optional<RunConfig> live;
};

/// Local HTTP/JSON service.
///
///   POST /sessions                      start a live session (human client)
///   POST /sessions/{id}/turns           client message -> counselor turn
///   GET  /sessions/{id}
///   POST /runs                          start an operator-mode run
///   GET  /runs, GET /runs/{id}
///   GET  /runs/{id}/tree/{version}      stored file bytes
///   GET  /runs/{id}/memory/{digest}
///   GET  /runs/{id}/candidates/{t}      the N candidates and their rewards
///   POST /runs/{id}/select/{t}          operator choice of winner
///
/// Errors are {"error": message} with 400, 404, 409 or 503.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evocounsel::run
