#include "lbt/analysis/scores.hpp"

#include <charconv>

#include <fmt/format.h>

#include "lbt/core/error.hpp"

namespace lbt::analysis {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  return fields;
}

std::string write_scores_csv(std::span<const ScoreRow> rows, std::span<const std::string> comment) {
  std::string out;
  for (const auto& c : comment) out += fmt::format("# {}\n", c);
  out += kScoresHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.pseudonym), csv_field(r.session_id),
                       csv_field(r.condition), csv_field(r.game), r.pre, r.post,
                       r.retention ? std::to_string(*r.retention) : std::string{}, r.item_count);
  }
  return out;
}

namespace {

template <class T>
T parse_number(const std::string& text, std::string_view column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError(fmt::format("column '{}': '{}' is not an integer", column, text));
  }
  return v;
}

}  // namespace

std::vector<ScoreRow> read_scores_csv(std::istream& in, std::string_view source) {
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      if (!header_seen) {
        if (line != kScoresHeader) throw DataError(fmt::format("expected header '{}'", kScoresHeader));
        header_seen = true;
        continue;
      }
      const auto f = csv_split(line);
      if (f.size() != 8) throw DataError(fmt::format("expected 8 fields, found {}", f.size()));
      ScoreRow r;
      r.pseudonym = f[0];
      r.session_id = f[1];
      r.condition = f[2];
      r.game = f[3];
      r.pre = parse_number<int>(f[4], "pre");
      r.post = parse_number<int>(f[5], "post");
      if (!f[6].empty()) r.retention = parse_number<int>(f[6], "retention");
      r.item_count = parse_number<std::size_t>(f[7], "item_count");
      const auto bad = [&](int v) { return v < 0 || static_cast<std::size_t>(v) > r.item_count; };
      if (bad(r.pre) || bad(r.post) || (r.retention && bad(*r.retention))) {
        throw DataError("score outside [0, item_count]");
      }
      rows.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  if (!header_seen) throw DataError(fmt::format("{}: missing header line", source));
  return rows;
}

std::vector<ScoreRow> scores_from_logs(std::span<const session::SessionLog> logs) {
  std::vector<ScoreRow> rows;
  for (const auto& log : logs) {
    const auto* pre = log.test(game::TestKind::pre);
    const auto* post = log.test(game::TestKind::post);
    if (!pre || !post) continue;
    ScoreRow r;
    r.pseudonym = log.header.config.tutor_pseudonym;
    r.session_id = log.session_id();
    r.condition = std::string(session::to_string(log.condition()));
    r.game = log.game_id();
    r.pre = pre->result.total;
    r.post = post->result.total;
    if (const auto* ret = log.test(game::TestKind::retention)) r.retention = ret->result.total;
    r.item_count = pre->result.item_count;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<GainRecord> gain_records(std::span<const ScoreRow> rows) {
  std::vector<GainRecord> out;
  for (const auto& r : rows) {
    auto g = gains(r.pre, r.post, r.retention ? std::optional<double>(*r.retention) : std::nullopt);
    g.pseudonym = r.pseudonym;
    g.session_id = r.session_id;
    g.condition = r.condition;
    g.game = r.game;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace lbt::analysis
