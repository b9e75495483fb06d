#include "poseforge/server.hpp"

#include <charconv>
#include <cctype>
#include <cstdlib>

#include "httplib.h"
#include "poseforge/protocol.hpp"

namespace poseforge {

namespace {

using protocol::json;

bool plain_name(const std::string& s) {
  if (s.empty() || s.size() > 128) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return s != "." && s != "..";
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, std::uint64_t revision, const Error& e) {
  std::string message = e.what();
  send_json(res, protocol::error_envelope(revision, to_string(e.kind()), message), protocol::http_status(e.kind()));
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(ErrorKind::ParseError, "request body is not a JSON object");
  return body;
}

std::uint64_t query_u64(const httplib::Request& req, const char* key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw Error(ErrorKind::ParseError, std::string("bad '") + key + "'");
  return out;
}

}  // namespace

int port_from_environment() {
  const char* env = std::getenv("POSEFORGE_PORT");
  if (env == nullptr) return kDefaultPort;
  std::string_view s(env);
  int port = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), port);
  if (ec != std::errc() || p != s.data() + s.size() || port < 1 || port > 65535) return kDefaultPort;
  return port;
}

SessionHost::SessionHost(ServerConfig config) : config_(std::move(config)) {}

std::shared_ptr<Session> SessionHost::create(const std::string& user, std::uint64_t seed) {
  if (!plain_name(user)) throw Error(ErrorKind::InvalidCommand, "user ids use letters, digits, '_', '-' and '.'");
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++);
  }
  SessionOptions options;
  options.render = config_.render;
  if (!config_.log_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config_.log_dir, ec);
    options.log_path = config_.log_dir / (user + "_" + id + ".jsonl");
  }
  auto session = std::make_shared<Session>(id, config_.dataset_root, user, seed, std::move(options));
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionHost::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::UnknownObject, "no session '" + id + "'");
  return it->second;
}

struct AnnotationServer::Impl {
  SessionHost host;
  httplib::Server http;

  explicit Impl(ServerConfig config) : host(std::move(config)) { routes(); }

  // Runs `fn`, turning typed errors into error envelopes.
  template <class Fn>
  void guarded(httplib::Response& res, std::uint64_t revision, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_error(res, revision, e);
    }
  }

  Command resolve(Command command) {
    if (auto* save = std::get_if<cmd::SaveWorkspace>(&command)) {
      std::string name = save->path.string();
      if (!plain_name(name)) throw Error(ErrorKind::InvalidCommand, "workspace names are plain file names");
      std::error_code ec;
      std::filesystem::create_directories(host.config().workspace_dir, ec);
      save->path = host.config().workspace_dir / name;
    }
    return command;
  }

  void routes() {
    http.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        json body = parse_body(req);
        const json& payload = body.contains("payload") ? body["payload"] : body;
        if (!payload.is_object() || !payload.contains("user") || !payload["user"].is_string())
          throw Error(ErrorKind::ParseError, "start_session needs a string 'user'");
        std::uint64_t seed = 0;
        if (payload.contains("seed")) {
          if (!payload["seed"].is_number_unsigned()) throw Error(ErrorKind::ParseError, "'seed' must be unsigned");
          seed = payload["seed"].get<std::uint64_t>();
        }
        auto session = host.create(payload["user"].get<std::string>(), seed);
        json out = protocol::state_to_json(*session);
        json plan = json::array();
        for (const TrialEntry& e : session->plan().entries) plan.push_back({{"sample", e.sample}, {"repetition", e.repetition}});
        out["plan"] = std::move(plan);
        send_json(res, protocol::envelope(session->revision(), "response", "session", std::move(out)), 201);
      });
    });

    http.Get(R"(/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        send_json(res, protocol::envelope(session->revision(), "response", "state", protocol::state_to_json(*session)));
      });
    });

    http.Post(R"(/session/([^/]+)/command)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        guarded(res, session->revision(), [&] {
          json body = parse_body(req);
          if (!body.contains("command") || !body["command"].is_string())
            throw Error(ErrorKind::ParseError, "envelope needs a string 'command'");
          const json payload = body.contains("payload") ? body["payload"] : json(nullptr);
          Command command = resolve(protocol::command_from_json(body["command"].get<std::string>(), payload));
          send_json(res, protocol::delta_to_json(session->apply(command)));
        });
      });
    });

    http.Get(R"(/session/([^/]+)/frame)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        guarded(res, session->revision(), [&] {
          CameraSelect camera =
              req.has_param("camera") ? parse_camera(req.get_param_value("camera")) : CameraSelect::Original;
          FrameSnapshot snap = session->frame(camera);
          if (req.has_param("revision") && query_u64(req, "revision", 0) != snap.revision) {
            send_json(res, protocol::error_envelope(snap.revision, "StaleRevision", "frame revision differs"), 409);
            return;
          }
          res.set_header("X-Revision", std::to_string(snap.revision));
          res.set_content(std::string(snap.png->begin(), snap.png->end()), "image/png");
        });
      });
    });

    http.Get(R"(/session/([^/]+)/history)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        std::uint64_t revision = session->revision();
        send_json(res, protocol::envelope(revision, "response", "history",
                                          {{"entries", protocol::history_to_json(session->history())}}));
      });
    });

    http.Get(R"(/session/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        json records = json::array();
        for (const AnnotationRecord& r : session->records()) records.push_back(protocol::record_to_json(r));
        send_json(res, protocol::envelope(session->revision(), "response", "log", {{"records", std::move(records)}}));
      });
    });

    http.Get(R"(/session/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        std::uint64_t after = query_u64(req, "after", 0);
        std::uint64_t timeout = std::min<std::uint64_t>(query_u64(req, "timeout_ms", 25000), 60000);
        std::uint64_t revision = session->wait_for_revision(after, std::chrono::milliseconds(timeout));
        const char* name = revision > after ? "revision" : "timeout";
        send_json(res, protocol::envelope(revision, "event", name, {{"after", after}}));
      });
    });

    http.Get(R"(/session/([^/]+)/mesh/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        Scene scene = session->scene();
        send_json(res, protocol::envelope(session->revision(), "response", "mesh",
                                          protocol::mesh_to_json(*scene.object(req.matches[2]).mesh)));
      });
    });

    http.Get(R"(/session/([^/]+)/background)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 0, [&] {
        auto session = host.get(req.matches[1]);
        auto png = encode_png(session->scene().background());
        res.set_header("X-Revision", std::to_string(session->revision()));
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      });
    });

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      send_json(res, protocol::error_envelope(0, "Internal", message), 500);
    });
  }
};

AnnotationServer::AnnotationServer(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
AnnotationServer::~AnnotationServer() = default;

int AnnotationServer::bind(int port) {
  if (port == 0) {
    int bound = impl_->http.bind_to_any_port("127.0.0.1");
    if (bound < 0) throw Error(ErrorKind::IoError, "cannot bind a local port");
    return bound;
  }
  if (!impl_->http.bind_to_port("127.0.0.1", port))
    throw Error(ErrorKind::IoError, "cannot bind 127.0.0.1:" + std::to_string(port));
  return port;
}

void AnnotationServer::run() { impl_->http.listen_after_bind(); }
void AnnotationServer::stop() { impl_->http.stop(); }
SessionHost& AnnotationServer::host() { return impl_->host; }

}  // namespace poseforge
