#include "lbt/session/session_log.hpp"

#include <fmt/format.h>

#include "lbt/core/digest.hpp"
#include "lbt/core/error.hpp"

namespace lbt::session {

using protocol::json;

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json header_json(const SessionHeader& h) {
  return {{"record", "header"},
          {"session_id", h.session_id},
          {"schema", kLogSchema},
          {"tool_version", h.tool_version},
          {"config", to_json(h.config)},
          {"game_title", h.game_title},
          {"n_states", h.n_states},
          {"n_actions", h.n_actions},
          {"iteration_count", h.iteration_count},
          {"schedule", h.schedule},
          {"created_at_ms", h.created_at_ms}};
}

json iteration_json(const IterationRecord& r) {
  return {{"record", "iteration"},
          {"session_id", r.session_id},
          {"index", r.index},
          {"state_id", r.state_id},
          {"robot_action", r.robot_action},
          {"robot_correct", r.robot_correct},
          {"h_given", opt(r.h_given)},
          {"feedback_correct", opt(r.feedback_correct)},
          {"answered_at_ms", r.answered_at_ms},
          {"time_ms", r.time_ms},
          {"hint_ms", r.hint_ms},
          {"hint_opens", r.hint_opens},
          {"prompted", r.prompted},
          {"hint_invited", r.hint_invited},
          {"responded", r.responded},
          {"answered_by", r.answered_by},
          {"greedy_accuracy", opt(r.greedy_accuracy)}};
}

IterationRecord iteration_from(const json& j) {
  IterationRecord r;
  r.session_id = j.at("session_id").get<std::string>();
  r.index = j.at("index").get<std::size_t>();
  r.state_id = j.at("state_id").get<std::string>();
  r.robot_action = j.at("robot_action").get<std::size_t>();
  r.robot_correct = j.at("robot_correct").get<bool>();
  r.h_given = get_opt<int>(j, "h_given");
  r.feedback_correct = get_opt<bool>(j, "feedback_correct");
  r.answered_at_ms = j.at("answered_at_ms").get<std::int64_t>();
  r.time_ms = j.at("time_ms").get<std::int64_t>();
  r.hint_ms = j.at("hint_ms").get<std::int64_t>();
  r.hint_opens = j.at("hint_opens").get<int>();
  r.prompted = j.at("prompted").get<bool>();
  r.hint_invited = j.at("hint_invited").get<bool>();
  r.responded = j.at("responded").get<bool>();
  r.answered_by = j.at("answered_by").get<std::string>();
  r.greedy_accuracy = get_opt<double>(j, "greedy_accuracy");
  if (r.time_ms < 0 || r.hint_ms < 0) throw DataError("iteration record has a negative duration");
  if (r.h_given && r.feedback_correct && ((*r.h_given == 1) == r.robot_correct) != *r.feedback_correct) {
    throw DataError("iteration record: feedback_correct disagrees with h_given and robot_correct");
  }
  return r;
}

}  // namespace

const TestRecord* SessionLog::test(game::TestKind kind) const {
  for (const auto& t : tests) {
    if (t.result.kind == kind) return &t;
  }
  return nullptr;
}

std::string to_jsonl(const SessionLog& log) {
  std::string out;
  const auto line = [&out](const json& j) {
    out += j.dump();
    out += '\n';
  };
  line(header_json(log.header));
  for (const auto& e : log.journal) {
    line({{"record", "event"}, {"session_id", e.session_id}, {"seq", e.seq}, {"at_ms", e.at_ms},
          {"type", e.type}, {"payload", e.payload}});
  }
  for (const auto& e : log.effects) {
    line({{"record", "effect"}, {"session_id", e.session_id}, {"seq", e.seq}, {"at_ms", e.at_ms},
          {"type", protocol::effect_type(e.effect)}, {"payload", protocol::effect_payload(e.effect)}});
  }
  for (const auto& r : log.iterations) line(iteration_json(r));
  for (const auto& t : log.tests) {
    line({{"record", "test"},
          {"session_id", t.session_id},
          {"kind", game::to_string(t.result.kind)},
          {"per_round", t.result.per_round_scores},
          {"total", t.result.total},
          {"item_count", t.result.item_count},
          {"at_ms", t.result.timestamp_ms},
          {"responses", t.responses}});
  }
  if (log.questionnaire) {
    const auto& q = *log.questionnaire;
    json ratings = json::object();
    for (const auto& [id, stars] : q.ratings) ratings[id] = stars;
    line({{"record", "questionnaire"}, {"session_id", q.session_id}, {"at_ms", q.at_ms},
          {"order", q.order}, {"ratings", std::move(ratings)}});
  }
  for (const auto& e : log.errors) {
    line({{"record", "protocol_error"}, {"session_id", e.session_id}, {"at_ms", e.at_ms},
          {"call", e.call}, {"message", e.message}});
  }
  if (log.footer) {
    const auto& f = *log.footer;
    line({{"record", "footer"},
          {"session_id", f.session_id},
          {"status", f.status},
          {"iterations", f.iterations},
          {"non_responses", f.non_responses},
          {"protocol_errors", f.protocol_errors},
          {"final_greedy_accuracy", opt(f.final_greedy_accuracy)},
          {"q_table", f.q_table},
          {"ended_at_ms", f.ended_at_ms}});
  }
  return out;
}

std::string log_digest(const SessionLog& log) { return sha256_hex(to_jsonl(log)); }

std::vector<SessionLog> read_session_logs(std::istream& in, std::string_view source) {
  std::vector<SessionLog> logs;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fail = [&](std::string_view why) {
      return DataError(fmt::format("{}:{}: {}", source, line_no, why));
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw fail("malformed or truncated JSON record");
    }
    try {
      if (!j.is_object() || !j.contains("record") || !j.contains("session_id")) {
        throw fail("record lacks 'record' or 'session_id'");
      }
      const auto kind = j.at("record").get<std::string>();
      const auto sid = j.at("session_id").get<std::string>();
      if (kind == "header") {
        if (j.value("schema", std::string{}) != kLogSchema) {
          throw fail(fmt::format("unsupported log schema '{}'", j.value("schema", std::string{})));
        }
        if (index.contains(sid)) throw fail(fmt::format("second header for session '{}'", sid));
        SessionHeader h;
        h.session_id = sid;
        h.tool_version = j.at("tool_version").get<std::string>();
        h.config = session_config_from_json(j.at("config"));
        h.game_title = j.at("game_title").get<std::string>();
        h.n_states = j.at("n_states").get<std::size_t>();
        h.n_actions = j.at("n_actions").get<std::size_t>();
        h.iteration_count = j.at("iteration_count").get<std::size_t>();
        h.schedule = j.at("schedule").get<std::vector<std::string>>();
        h.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
        index[sid] = logs.size();
        logs.push_back(SessionLog{std::move(h), {}, {}, {}, {}, std::nullopt, {}, std::nullopt});
        continue;
      }
      const auto it = index.find(sid);
      if (it == index.end()) throw fail(fmt::format("'{}' record for session '{}' before its header", kind, sid));
      SessionLog& log = logs[it->second];
      if (kind == "event") {
        log.journal.push_back({sid, j.at("seq").get<std::uint64_t>(), j.at("at_ms").get<std::int64_t>(),
                               j.at("type").get<std::string>(), j.at("payload")});
      } else if (kind == "effect") {
        log.effects.push_back({sid, j.at("seq").get<std::uint64_t>(), j.at("at_ms").get<std::int64_t>(),
                               protocol::decode_effect(j.at("type").get<std::string>(), j.at("payload"))});
      } else if (kind == "iteration") {
        log.iterations.push_back(iteration_from(j));
      } else if (kind == "test") {
        TestRecord t;
        t.session_id = sid;
        t.result.kind = game::parse_test_kind(j.at("kind").get<std::string>());
        t.result.per_round_scores = j.at("per_round").get<std::vector<int>>();
        t.result.total = j.at("total").get<int>();
        t.result.item_count = j.at("item_count").get<std::size_t>();
        t.result.timestamp_ms = j.at("at_ms").get<std::int64_t>();
        t.responses = j.at("responses").get<std::vector<std::size_t>>();
        log.tests.push_back(std::move(t));
      } else if (kind == "questionnaire") {
        QuestionnaireRecord q;
        q.session_id = sid;
        q.at_ms = j.at("at_ms").get<std::int64_t>();
        q.order = j.at("order").get<std::vector<std::string>>();
        for (const auto& [id, stars] : j.at("ratings").items()) q.ratings[id] = stars.get<int>();
        log.questionnaire = std::move(q);
      } else if (kind == "protocol_error") {
        log.errors.push_back({sid, j.at("at_ms").get<std::int64_t>(), j.at("call").get<std::string>(),
                              j.at("message").get<std::string>()});
      } else if (kind == "footer") {
        SessionFooter f;
        f.session_id = sid;
        f.status = j.at("status").get<std::string>();
        f.iterations = j.at("iterations").get<std::size_t>();
        f.non_responses = j.at("non_responses").get<std::size_t>();
        f.protocol_errors = j.at("protocol_errors").get<std::size_t>();
        f.final_greedy_accuracy = get_opt<double>(j, "final_greedy_accuracy");
        f.q_table = j.at("q_table").get<std::string>();
        f.ended_at_ms = j.at("ended_at_ms").get<std::int64_t>();
        log.footer = std::move(f);
      } else {
        throw fail(fmt::format("unknown record type '{}'", kind));
      }
    } catch (const DataError& e) {
      const std::string what = e.what();
      if (what.starts_with(std::string(source) + ":")) throw;
      throw fail(what);
    } catch (const json::exception& e) {
      throw fail(fmt::format("schema mismatch: {}", e.what()));
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return logs;
}

}  // namespace lbt::session
