#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/analysis/stats.hpp"
#include "lbt/session/session_log.hpp"

namespace lbt::analysis {

// Fraction of answered iterations whose judgment matched the truth.
// Iterations without a judgment (self-practice, non-responses) are skipped;
// throws DomainError when none remain.
double feedback_accuracy(const session::SessionLog& log);

enum class Metric { time_ms, hint_ms };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

enum class WindowMode { wilcoxon, mann_whitney };
std::string_view to_string(WindowMode m);
WindowMode parse_window_mode(std::string_view text);

struct WindowComparison {
  Metric metric = Metric::time_ms;
  WindowMode mode = WindowMode::wilcoxon;
  std::size_t k = 5;
  std::size_t used = 0;
  std::size_t excluded = 0;  // sessions with fewer than 2k iterations
  // Per-session window means, aligned by session.
  std::vector<double> first;
  std::vector<double> last;
  // Absent when no usable session remains. When every paired difference is
  // zero the report has statistic 0 and p = 1.
  std::optional<StatReport> report;
};

// Compares each session's mean over its last k iterations with its mean
// over the first k: Wilcoxon on last - first, or Mann-Whitney with the last
// windows as the first group. Negative effects mean the metric decreased.
WindowComparison window_compare(std::span<const session::SessionLog> logs, Metric metric, std::size_t k = 5,
                                WindowMode mode = WindowMode::wilcoxon,
                                Alternative alt = Alternative::two_sided);

struct GainRecord {
  std::string pseudonym;
  std::string session_id;
  std::string condition;
  std::string game;
  double pre = 0;
  double post = 0;
  std::optional<double> retention;
  double knowledge_gain = 0;              // post - pre
  std::optional<double> retention_gain;  // retention - pre

  bool operator==(const GainRecord&) const = default;
};

GainRecord gains(double pre, double post, std::optional<double> retention = std::nullopt);

struct MedianSplit {
  double median = 0;
  std::vector<GainRecord> low;   // pre <= median
  std::vector<GainRecord> high;  // pre > median
};

MedianSplit median_split(std::span<const GainRecord> records);

}  // namespace lbt::analysis
