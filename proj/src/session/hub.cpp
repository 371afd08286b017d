#include "lbt/session/hub.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "lbt/core/error.hpp"
#include "lbt/robot/robot.hpp"

namespace lbt::session {

using protocol::Effects;
using protocol::json;

struct Hub::Entry {
  std::mutex mu;
  std::optional<Session> session;
  std::unique_ptr<robot::RobotAdapter> robot;
  robot::TranscriptBackend* transcript = nullptr;
  std::uint64_t expected_seq = 1;
  std::map<std::uint64_t, protocol::SessionEvent> pending;
  std::uint64_t out_seq = 0;
  std::vector<OutboundMessage> outbox;
  std::int64_t last_ms = 0;
  bool persisted = false;
};

json to_json(const SessionSummary& s) {
  return {{"session_id", s.session_id},
          {"game_id", s.game_id},
          {"condition", to_string(s.condition)},
          {"tutor_pseudonym", s.tutor_pseudonym},
          {"phase", to_string(s.phase)},
          {"iteration", s.iteration},
          {"iteration_count", s.iteration_count}};
}

Hub::Hub(game::GameCatalog catalog, HubOptions options)
    : catalog_(std::move(catalog)), options_(std::move(options)) {}

Hub::~Hub() = default;

std::shared_ptr<Hub::Entry> Hub::find(std::string_view session_id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string Hub::create_session(SessionConfig config, std::int64_t now_ms) {
  auto game = catalog_.find(config.game_id);
  if (!game) throw DomainError(fmt::format("unknown game '{}'", config.game_id));

  std::unique_lock lock(mu_);
  if (config.session_id.empty()) {
    do {
      config.session_id = fmt::format("session-{:04d}", next_id_++);
    } while (sessions_.contains(config.session_id));
  } else if (sessions_.contains(config.session_id)) {
    throw DomainError(fmt::format("session '{}' already exists", config.session_id));
  }

  auto entry = std::make_shared<Entry>();
  const std::string pseudonym = config.tutor_pseudonym;
  auto [session, effects] = Session::create(std::move(config), game, now_ms);
  const std::string id = session.id();
  auto backend = std::make_unique<robot::TranscriptBackend>();
  entry->transcript = backend.get();
  entry->robot = std::make_unique<robot::RobotAdapter>(game, std::move(backend), pseudonym);
  entry->session.emplace(std::move(session));
  entry->last_ms = now_ms;
  publish(*entry, effects, now_ms);
  sessions_.emplace(id, std::move(entry));
  return id;
}

void Hub::publish(Entry& e, const Effects& effects, std::int64_t now_ms) {
  const std::string& id = e.session->id();
  for (const auto& effect : effects) {
    const auto env = protocol::encode_effect(id, ++e.out_seq, now_ms, effect);
    for (const auto topic : protocol::effect_topics(effect)) {
      e.outbox.push_back({protocol::topic_name(id, topic), env});
      if (options_.sink) options_.sink(e.outbox.back());
    }
  }
  e.robot->execute_effects(effects, now_ms);
}

void Hub::settle(Entry& e, std::int64_t now_ms) {
  auto& s = *e.session;
  if (options_.auto_finalize && s.phase().kind == PhaseKind::completed) {
    publish(e, s.finalize(now_ms), now_ms);
  }
  if (s.finished() && !e.persisted) persist(e);
}

void Hub::persist(Entry& e) {
  e.persisted = true;
  if (options_.log_dir.empty()) return;
  std::filesystem::create_directories(options_.log_dir);
  const auto& id = e.session->id();
  std::ofstream(options_.log_dir / (id + ".jsonl"), std::ios::binary) << to_jsonl(e.session->log());
  e.transcript->write(options_.log_dir / (id + ".transcript.txt"));
}

void Hub::apply(Entry& e, const protocol::SessionEvent& event, std::int64_t now_ms) {
  const std::int64_t at = std::max(now_ms, e.last_ms);
  auto stamped = event;
  stamped.timestamp_ms = at;
  // Timers due before the event fire first.
  for (auto d = e.session->next_deadline(); d && *d <= at; d = e.session->next_deadline()) {
    auto fx = e.session->tick(*d);
    if (fx.empty() && e.session->next_deadline() == d) break;
    publish(e, fx, *d);
  }
  publish(e, e.session->handle(stamped), at);
  e.last_ms = at;
  settle(e, at);
}

void Hub::deliver(const protocol::Envelope& envelope, std::int64_t now_ms) {
  deliver(protocol::decode_event(envelope), now_ms);
}

void Hub::deliver(const protocol::SessionEvent& event, std::int64_t now_ms) {
  auto entry = find(event.session_id);
  if (!entry) throw ProtocolError(fmt::format("unknown session '{}'", event.session_id));
  std::lock_guard lock(entry->mu);
  if (event.seq < entry->expected_seq || entry->pending.contains(event.seq)) return;
  entry->pending.emplace(event.seq, event);
  for (auto it = entry->pending.begin(); it != entry->pending.end() && it->first == entry->expected_seq;
       it = entry->pending.erase(it)) {
    apply(*entry, it->second, now_ms);
    ++entry->expected_seq;
  }
}

void Hub::advance(std::string_view session_id, std::int64_t now_ms) {
  auto entry = find(session_id);
  if (!entry) throw ProtocolError(fmt::format("unknown session '{}'", session_id));
  std::lock_guard lock(entry->mu);
  const std::int64_t at = std::max(now_ms, entry->last_ms);
  publish(*entry, entry->session->advance(at), at);
  entry->last_ms = at;
}

void Hub::finalize(std::string_view session_id, std::int64_t now_ms) {
  auto entry = find(session_id);
  if (!entry) throw ProtocolError(fmt::format("unknown session '{}'", session_id));
  std::lock_guard lock(entry->mu);
  const std::int64_t at = std::max(now_ms, entry->last_ms);
  publish(*entry, entry->session->finalize(at), at);
  entry->last_ms = at;
  settle(*entry, at);
}

void Hub::tick_all(std::int64_t now_ms) {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (const auto& e : entries) {
    std::lock_guard lock(e->mu);
    auto& s = *e->session;
    for (auto d = s.next_deadline(); d && *d <= now_ms; d = s.next_deadline()) {
      auto fx = s.tick(*d);
      if (fx.empty() && s.next_deadline() == d) break;
      publish(*e, fx, *d);
      e->last_ms = std::max(e->last_ms, *d);
    }
    settle(*e, std::max(now_ms, e->last_ms));
  }
}

namespace {

SessionSummary summarize(const Session& s) {
  return {s.id(),
          s.config().game_id,
          s.config().condition,
          s.config().tutor_pseudonym,
          s.phase().kind,
          s.iteration(),
          s.schedule().order.size()};
}

}  // namespace

std::vector<SessionSummary> Hub::list() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  std::vector<SessionSummary> out;
  for (const auto& e : entries) {
    std::lock_guard lock(e->mu);
    out.push_back(summarize(*e->session));
  }
  return out;
}

std::optional<SessionSummary> Hub::summary(std::string_view session_id) const {
  auto e = find(session_id);
  if (!e) return std::nullopt;
  std::lock_guard lock(e->mu);
  return summarize(*e->session);
}

bool Hub::finished(std::string_view session_id) const {
  auto e = find(session_id);
  if (!e) return false;
  std::lock_guard lock(e->mu);
  return e->session->finished();
}

std::optional<SessionLog> Hub::log(std::string_view session_id) const {
  auto e = find(session_id);
  if (!e) return std::nullopt;
  std::lock_guard lock(e->mu);
  return e->session->log();
}

std::optional<std::string> Hub::log_jsonl(std::string_view session_id) const {
  auto e = find(session_id);
  if (!e) return std::nullopt;
  std::lock_guard lock(e->mu);
  return to_jsonl(e->session->log());
}

std::optional<std::string> Hub::transcript(std::string_view session_id) const {
  auto e = find(session_id);
  if (!e) return std::nullopt;
  std::lock_guard lock(e->mu);
  return e->transcript->render();
}

std::vector<protocol::Envelope> Hub::messages(std::string_view session_id, protocol::Topic topic,
                                              std::uint64_t after_seq) const {
  auto e = find(session_id);
  if (!e) throw ProtocolError(fmt::format("unknown session '{}'", session_id));
  const auto name = protocol::topic_name(session_id, topic);
  std::lock_guard lock(e->mu);
  std::vector<protocol::Envelope> out;
  for (const auto& m : e->outbox) {
    if (m.topic == name && m.envelope.seq > after_seq) out.push_back(m.envelope);
  }
  return out;
}

void Hub::shutdown(std::int64_t now_ms) {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (const auto& e : entries) {
    std::lock_guard lock(e->mu);
    const std::int64_t at = std::max(now_ms, e->last_ms);
    if (!e->session->finished()) publish(*e, e->session->abort(at), at);
    if (!e->persisted) persist(*e);
  }
}

}  // namespace lbt::session
