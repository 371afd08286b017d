#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/analysis/metrics.hpp"
#include "lbt/session/session_log.hpp"

namespace lbt::analysis {

// One participant's knowledge-test scores.
struct ScoreRow {
  std::string pseudonym;
  std::string session_id;
  std::string condition;
  std::string game;
  int pre = 0;
  int post = 0;
  std::optional<int> retention;
  std::size_t item_count = 0;

  bool operator==(const ScoreRow&) const = default;
};

inline constexpr std::string_view kScoresHeader = "pseudonym,session_id,condition,game,pre,post,retention,item_count";

// RFC 4180 field quoting and splitting.
std::string csv_field(std::string_view text);
std::vector<std::string> csv_split(std::string_view line);

// Header line, then one row per score. `comment` lines come first, each
// prefixed with "# ". An empty retention cell means "not taken".
std::string write_scores_csv(std::span<const ScoreRow> rows, std::span<const std::string> comment = {});
// Skips "#" lines; throws DataError naming `source` and the line on a bad
// header or row.
std::vector<ScoreRow> read_scores_csv(std::istream& in, std::string_view source);

// Pre/post scores of every log that has both tests, in log order.
std::vector<ScoreRow> scores_from_logs(std::span<const session::SessionLog> logs);

std::vector<GainRecord> gain_records(std::span<const ScoreRow> rows);

}  // namespace lbt::analysis
