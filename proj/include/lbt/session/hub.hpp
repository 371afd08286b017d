#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/game/content_pack.hpp"
#include "lbt/protocol/messages.hpp"
#include "lbt/session/session.hpp"

namespace lbt::session {

struct OutboundMessage {
  std::string topic;
  protocol::Envelope envelope;
};

// Called for every outbound message, e.g. to forward it to a broker.
using MessageSink = std::function<void(const OutboundMessage&)>;

struct SessionSummary {
  std::string session_id;
  std::string game_id;
  Condition condition = Condition::learning_by_teaching;
  std::string tutor_pseudonym;
  PhaseKind phase = PhaseKind::intro;
  std::size_t iteration = 0;
  std::size_t iteration_count = 0;
};

protocol::json to_json(const SessionSummary& s);

struct HubOptions {
  // Where finished session logs and robot transcripts are written; empty
  // keeps them in memory only.
  std::filesystem::path log_dir;
  // Finalize a session as soon as it reaches the completed phase.
  bool auto_finalize = true;
  MessageSink sink;
};

/// Hosts many concurrent sessions.
///
/// Inbound events for one session are applied in sequence-number order
/// (early arrivals are held back, duplicates dropped) under that session's
/// lock; sessions share no mutable state. Time is supplied by the caller.
class Hub {
 public:
  explicit Hub(game::GameCatalog catalog, HubOptions options = {});
  ~Hub();

  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  // Returns the session id (assigned when the config has none). Throws
  // DomainError for an unknown game or a duplicate id.
  std::string create_session(SessionConfig config, std::int64_t now_ms);

  // Accepts a from_client envelope. Throws ProtocolError for unknown
  // sessions or event types; events the phase rejects are logged in the
  // session log instead.
  void deliver(const protocol::Envelope& envelope, std::int64_t now_ms);
  void deliver(const protocol::SessionEvent& event, std::int64_t now_ms);

  // Direct control of one session (advance, finalize).
  void advance(std::string_view session_id, std::int64_t now_ms);
  void finalize(std::string_view session_id, std::int64_t now_ms);

  // Fires every timer due at or before now_ms, at its exact deadline.
  void tick_all(std::int64_t now_ms);

  std::vector<SessionSummary> list() const;
  std::optional<SessionSummary> summary(std::string_view session_id) const;
  bool finished(std::string_view session_id) const;
  std::optional<std::string> log_jsonl(std::string_view session_id) const;
  std::optional<SessionLog> log(std::string_view session_id) const;
  std::optional<std::string> transcript(std::string_view session_id) const;

  // Outbound messages of a session on one topic with seq > after_seq.
  std::vector<protocol::Envelope> messages(std::string_view session_id, protocol::Topic topic,
                                           std::uint64_t after_seq = 0) const;

  // Aborts every unfinished session and writes all logs. Idempotent.
  void shutdown(std::int64_t now_ms);

  const game::GameCatalog& catalog() const { return catalog_; }

 private:
  struct Entry;

  std::shared_ptr<Entry> find(std::string_view session_id) const;
  void publish(Entry& e, const protocol::Effects& effects, std::int64_t now_ms);
  void settle(Entry& e, std::int64_t now_ms);
  void apply(Entry& e, const protocol::SessionEvent& event, std::int64_t now_ms);
  void persist(Entry& e);

  game::GameCatalog catalog_;
  HubOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>, std::less<>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace lbt::session
