#include <atomic>
#include <condition_variable>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "karma/api.hpp"
#include "karma/error.hpp"

namespace karma {

namespace {

httplib::Server* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

void write_snapshot(const GameEngine& engine, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write snapshot " + tmp);
    out << engine.snapshot();
    out.flush();
    if (!out) throw IoError("snapshot write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace snapshot " + path + ": " + ec.message());
}

void serve(GameEngine& engine, const ServeOptions& options) {
  if (!options.snapshot_path.empty() && std::filesystem::exists(options.snapshot_path)) {
    std::ifstream in(options.snapshot_path);
    std::stringstream text;
    text << in.rdbuf();
    engine.restore(text.str());
  }

  Api api(engine);
  httplib::Server server;
  auto handler = [&api](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = api.route(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/api/.*", handler);
  server.Post("/api/.*", handler);
  if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir))
    throw IoError("static directory not found: " + options.static_dir);

  std::mutex mutex;
  std::condition_variable wake;
  bool stopping = false;
  std::thread snapshotter;
  if (!options.snapshot_path.empty()) {
    snapshotter = std::thread([&] {
      std::unique_lock lock(mutex);
      while (!wake.wait_for(lock, options.snapshot_interval, [&] { return stopping; })) {
        try {
          write_snapshot(engine, options.snapshot_path);
        } catch (const std::exception& e) {
          std::cerr << "snapshot failed: " << e.what() << "\n";
        }
      }
    });
  }

  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  const bool listened = server.listen(options.host, options.port);
  g_server = nullptr;

  {
    std::lock_guard lock(mutex);
    stopping = true;
  }
  wake.notify_all();
  if (snapshotter.joinable()) snapshotter.join();
  if (!options.snapshot_path.empty()) write_snapshot(engine, options.snapshot_path);
  if (!listened) throw IoError("cannot listen on " + options.host + ":" + std::to_string(options.port));
}

}  // namespace karma
