#include "lbt/server/http_server.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <yaml-cpp/yaml.h>

#include "lbt/core/error.hpp"
#include "lbt/core/version.hpp"

namespace lbt::server {

using protocol::json;

ServeConfig parse_serve_config(std::string_view text, std::string_view source) {
  ServeConfig c;
  if (const char* env = std::getenv("LBT_LOG_DIR"); env && *env) c.log_dir = env;
  else c.log_dir = "logs";

  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw DataError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw DataError(fmt::format("{}:1: config must be a mapping of keys to values", source));

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    const int line = v.Mark().line + 1;
    try {
      if (key == "host") c.host = v.as<std::string>();
      else if (key == "port") c.port = v.as<int>();
      else if (key == "log_dir") c.log_dir = v.as<std::string>();
      else if (key == "tick_ms") c.tick_ms = v.as<std::int64_t>();
      else if (key == "auto_finalize") c.auto_finalize = v.as<bool>();
      else if (key == "static_dir") c.static_dir = v.as<std::string>();
      else if (key == "content_packs") {
        if (!v.IsSequence()) throw DataError("content_packs must be a list of paths");
        for (const auto& p : v) c.content_packs.emplace_back(p.as<std::string>());
      } else {
        throw DataError(fmt::format("unknown key '{}'", key));
      }
    } catch (const YAML::Exception&) {
      throw DataError(fmt::format("{}:{}: key '{}' has the wrong type", source, line, key));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source, line, e.what()));
    }
  }
  if (c.port < 0 || c.port > 65535) throw DataError(fmt::format("{}: port {} is out of range", source, c.port));
  if (c.tick_ms <= 0) throw DataError(fmt::format("{}: tick_ms must be positive", source));
  return c;
}

ServeConfig load_serve_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_serve_config(ss.str(), path.string());
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

HttpServer::HttpServer(session::Hub& hub, std::function<std::int64_t()> clock, std::int64_t tick_ms,
                       std::filesystem::path static_dir)
    : hub_(hub),
      clock_(std::move(clock)),
      tick_ms_(tick_ms),
      static_dir_(std::move(static_dir)),
      http_(std::make_unique<httplib::Server>()) {
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& s = *http_;

  s.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", kToolVersion}, {"sessions", hub_.list().size()}});
  });

  s.Get("/v1/games", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"games", hub_.catalog().ids()}});
  });

  s.Get("/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& summary : hub_.list()) list.push_back(session::to_json(summary));
    send_json(res, 200, {{"sessions", list}});
  });

  s.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::parse_error& e) {
      return send_error(res, 400, fmt::format("malformed JSON: {}", e.what()));
    }
    try {
      auto config = session::session_config_from_json(body);
      if (!config.session_id.empty() && hub_.summary(config.session_id)) {
        return send_error(res, 409, fmt::format("session '{}' already exists", config.session_id));
      }
      const auto id = hub_.create_session(std::move(config), clock_());
      send_json(res, 201, {{"session_id", id}});
    } catch (const DomainError& e) {
      send_error(res, 400, e.what());
    }
  });

  s.Get(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto summary = hub_.summary(req.matches[1].str());
    if (!summary) return send_error(res, 404, "unknown session");
    send_json(res, 200, session::to_json(*summary));
  });

  s.Get(R"(/v1/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto text = hub_.log_jsonl(req.matches[1].str());
    if (!text) return send_error(res, 404, "unknown session");
    res.set_content(*text, "application/x-ndjson");
  });

  s.Get(R"(/v1/sessions/([^/]+)/transcript)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto text = hub_.transcript(req.matches[1].str());
    if (!text) return send_error(res, 404, "unknown session");
    res.set_content(*text, "text/plain");
  });

  s.Post(R"(/v1/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    if (!hub_.summary(id)) return send_error(res, 404, "unknown session");
    try {
      auto env = protocol::parse_envelope(std::string_view(req.body));
      if (env.session_id != id) return send_error(res, 400, "envelope session_id does not match the URL");
      hub_.deliver(env, clock_());
      send_json(res, 202, {{"accepted", env.seq}});
    } catch (const ProtocolError& e) {
      send_error(res, 400, e.what());
    }
  });

  const auto control = [this](auto action) {
    return [this, action](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.matches[1].str();
      if (!hub_.summary(id)) return send_error(res, 404, "unknown session");
      try {
        action(id);
        send_json(res, 200, session::to_json(*hub_.summary(id)));
      } catch (const ProtocolError& e) {
        send_error(res, 409, e.what());
      }
    };
  };
  s.Post(R"(/v1/sessions/([^/]+)/advance)", control([this](const std::string& id) { hub_.advance(id, clock_()); }));
  s.Post(R"(/v1/sessions/([^/]+)/finalize)", control([this](const std::string& id) { hub_.finalize(id, clock_()); }));

  s.Get(R"(/v1/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    if (!hub_.summary(id)) return send_error(res, 404, "unknown session");
    const auto topic_name = req.has_param("topic") ? req.get_param_value("topic") : std::string("to_ui");
    protocol::Topic topic;
    if (topic_name == "to_ui") topic = protocol::Topic::to_ui;
    else if (topic_name == "to_robot") topic = protocol::Topic::to_robot;
    else return send_error(res, 400, "topic must be to_ui or to_robot");
    std::uint64_t after = 0;
    if (req.has_param("after")) {
      try {
        after = std::stoull(req.get_param_value("after"));
      } catch (const std::exception&) {
        return send_error(res, 400, "after must be a sequence number");
      }
    }
    json out = json::array();
    for (const auto& env : hub_.messages(id, topic, after)) out.push_back(protocol::to_json(env));
    send_json(res, 200, {{"topic", protocol::topic_name(id, topic)}, {"messages", out}});
  });

  if (!static_dir_.empty()) s.set_mount_point("/ui", static_dir_.string());
}

int HttpServer::start(const std::string& host, int port) {
  if (running_) throw std::runtime_error("server already started");
  const int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
  running_ = true;
  listener_ = std::thread([this] { http_->listen_after_bind(); });
  ticker_ = std::thread([this] {
    while (running_) {
      hub_.tick_all(clock_());
      std::this_thread::sleep_for(std::chrono::milliseconds(tick_ms_));
    }
  });
  http_->wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (!running_.exchange(false)) return;
  http_->stop();
  if (listener_.joinable()) listener_.join();
  if (ticker_.joinable()) ticker_.join();
}

}  // namespace lbt::server
