#include "lbt/analysis/metrics.hpp"

#include <fmt/format.h>

#include "lbt/core/error.hpp"

namespace lbt::analysis {

double feedback_accuracy(const session::SessionLog& log) {
  std::size_t judged = 0;
  std::size_t correct = 0;
  for (const auto& r : log.iterations) {
    if (!r.feedback_correct) continue;
    ++judged;
    if (*r.feedback_correct) ++correct;
  }
  if (judged == 0) {
    throw DomainError(fmt::format("session '{}' has no judged iterations", log.session_id()));
  }
  return static_cast<double>(correct) / static_cast<double>(judged);
}

std::string_view to_string(Metric m) { return m == Metric::hint_ms ? "hint_ms" : "time_ms"; }

Metric parse_metric(std::string_view text) {
  if (text == "time_ms") return Metric::time_ms;
  if (text == "hint_ms") return Metric::hint_ms;
  throw DomainError(fmt::format("unknown metric '{}'", text));
}

std::string_view to_string(WindowMode m) { return m == WindowMode::mann_whitney ? "mann_whitney" : "wilcoxon"; }

WindowMode parse_window_mode(std::string_view text) {
  if (text == "wilcoxon") return WindowMode::wilcoxon;
  if (text == "mann_whitney" || text == "mwu") return WindowMode::mann_whitney;
  throw DomainError(fmt::format("unknown window mode '{}'", text));
}

WindowComparison window_compare(std::span<const session::SessionLog> logs, Metric metric, std::size_t k,
                                WindowMode mode, Alternative alt) {
  if (k == 0) throw DomainError("window size must be positive");
  WindowComparison w;
  w.metric = metric;
  w.mode = mode;
  w.k = k;
  const auto value = [metric](const session::IterationRecord& r) {
    return static_cast<double>(metric == Metric::hint_ms ? r.hint_ms : r.time_ms);
  };
  for (const auto& log : logs) {
    const auto& it = log.iterations;
    if (it.size() < 2 * k) {
      ++w.excluded;
      continue;
    }
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      head += value(it[i]);
      tail += value(it[it.size() - k + i]);
    }
    w.first.push_back(head / static_cast<double>(k));
    w.last.push_back(tail / static_cast<double>(k));
  }
  w.used = w.first.size();
  if (w.used == 0) return w;

  if (mode == WindowMode::mann_whitney) {
    w.report = mann_whitney_u(w.last, w.first, alt);
    return w;
  }
  bool any_change = false;
  for (std::size_t i = 0; i < w.used; ++i) any_change = any_change || w.last[i] != w.first[i];
  if (!any_change) {
    StatReport r;
    r.test = "wilcoxon_signed_rank";
    r.statistic = 0.0;
    r.z = 0.0;
    r.p_value = 1.0;
    r.p_approx = 1.0;
    r.effect_size = 0.0;
    r.effect_name = "r";
    r.alternative = alt;
    w.report = r;
    return w;
  }
  w.report = wilcoxon_signed_rank(w.last, w.first, alt);
  return w;
}

GainRecord gains(double pre, double post, std::optional<double> retention) {
  GainRecord g;
  g.pre = pre;
  g.post = post;
  g.retention = retention;
  g.knowledge_gain = post - pre;
  if (retention) g.retention_gain = *retention - pre;
  return g;
}

MedianSplit median_split(std::span<const GainRecord> records) {
  if (records.size() < 2) throw DomainError("median split needs at least two records");
  std::vector<double> pres;
  for (const auto& r : records) pres.push_back(r.pre);
  MedianSplit s;
  s.median = median(pres);
  for (const auto& r : records) (r.pre <= s.median ? s.low : s.high).push_back(r);
  return s;
}

}  // namespace lbt::analysis
