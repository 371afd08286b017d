#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lbt/analysis/scores.hpp"
#include "lbt/session/session_log.hpp"

namespace lbt::analysis {

struct Provenance {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string input_digest;  // SHA-256 over the input files
};

struct ReportBundle {
  std::string markdown;
  std::string metrics_csv;       // metric,game,condition,unit,n,mean,sd,median,q25,q75
  std::string windows_csv;       // first-vs-last window comparisons
  std::string gains_csv;         // one row per participant
  std::string comparisons_csv;   // between-condition tests on gains
  std::string median_split_csv;  // one row per participant with its group
};

// Gains come from `scores` when given, otherwise from the logs' tests.
// Output depends only on the inputs: ordering is by (game, condition, id).
ReportBundle build_report(std::span<const session::SessionLog> logs, std::span<const ScoreRow> scores,
                          const Provenance& provenance);

// Writes the markdown to `report_path` and the tables next to it as
// metrics.csv, windows.csv, gains.csv, comparisons.csv and median_split.csv.
void write_report(const ReportBundle& bundle, const std::filesystem::path& report_path);

}  // namespace lbt::analysis
