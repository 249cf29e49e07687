#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "karma/game.hpp"

namespace karma {

struct ApiResponse {
  int status = 200;
  std::string body;  // {"ok": ..., "data" | "error": ...}
};

// HTTP status used for each envelope error code.
int http_status(GameErrorCode code);

// JSON-over-HTTP front end of a GameEngine. Transport-free so it can be
// driven directly from tests; serve() wires it to a socket.
class Api {
 public:
  explicit Api(GameEngine& engine) : engine_(engine) {}

  ApiResponse route(std::string_view method, std::string_view path, std::string_view body);

 private:
  GameEngine& engine_;
};

struct ServeOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string static_dir;     // UI bundle; empty disables static serving
  std::string snapshot_path;  // empty disables snapshots
  std::chrono::seconds snapshot_interval{5};
};

// Blocks until the server stops (SIGINT / SIGTERM). Restores sessions from
// the snapshot file when present and writes a final snapshot on exit.
void serve(GameEngine& engine, const ServeOptions& options);

// Atomic replace: write to a temporary file, then rename over the target.
void write_snapshot(const GameEngine& engine, const std::string& path);

}  // namespace karma
