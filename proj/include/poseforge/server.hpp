#pragma once

// Localhost HTTP host for annotation sessions.
//
//   POST /session                          start a session
//   GET  /session/{id}                     state snapshot
//   POST /session/{id}/command             apply one command
//   GET  /session/{id}/frame?camera=&revision=   PNG, X-Revision header
//   GET  /session/{id}/history             pose history
//   GET  /session/{id}/log                 confirmed records
//   GET  /session/{id}/events?after=&timeout_ms=  long-poll for a new revision
//   GET  /session/{id}/mesh/{object}       mesh geometry
//   GET  /session/{id}/background          background PNG

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "poseforge/session.hpp"

namespace poseforge {

inline constexpr int kDefaultPort = 7646;

/// POSEFORGE_PORT when set and valid, else 7646.
int port_from_environment();

struct ServerConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path log_dir = "logs";
  /// save_workspace paths resolve inside this directory.
  std::filesystem::path workspace_dir = "workspaces";
  RenderOptions render;
};

class SessionHost {
 public:
  explicit SessionHost(ServerConfig config);

  std::shared_ptr<Session> create(const std::string& user, std::uint64_t seed);
  /// UnknownObject for an unknown id.
  std::shared_ptr<Session> get(const std::string& id) const;
  const ServerConfig& config() const { return config_; }

 private:
  ServerConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

class AnnotationServer {
 public:
  explicit AnnotationServer(ServerConfig config);
  ~AnnotationServer();

  /// Binds 127.0.0.1:`port` (0 picks a free port) and returns the bound port.
  int bind(int port);
  /// Serves until stop().
  void run();
  void stop();
  SessionHost& host();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace poseforge
