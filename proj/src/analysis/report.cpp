#include "lbt/analysis/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lbt/analysis/metrics.hpp"
#include "lbt/analysis/stats.hpp"
#include "lbt/core/error.hpp"

namespace lbt::analysis {

namespace {

using session::SessionLog;

std::string num(double v) {
  auto s = fmt::format("{:.4f}", v);
  if (s == "-0.0000") s.erase(0, 1);
  return s;
}
std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

struct Summary {
  std::size_t n = 0;
  double mean = 0, sd = 0, median = 0, q25 = 0, q75 = 0;
  bool has_sd = false;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = analysis::mean(v);
  if (v.size() >= 2) {
    s.sd = stdev(v);
    s.has_sd = true;
  }
  s.median = analysis::median(v);
  s.q25 = quantile(v, 0.25);
  s.q75 = quantile(v, 0.75);
  return s;
}

using Key = std::pair<std::string, std::string>;  // (game, condition)

struct MetricRow {
  std::string metric;
  std::string unit;
  Key key;
  Summary s;
};

std::vector<MetricRow> metric_rows(std::span<const SessionLog> logs) {
  std::map<Key, std::vector<double>> fb, final_acc, time, hint;
  std::set<Key> keys;
  for (const auto& log : logs) {
    const Key key{log.game_id(), std::string(session::to_string(log.condition()))};
    keys.insert(key);
    bool judged = false;
    for (const auto& r : log.iterations) {
      if (r.feedback_correct) judged = true;
      if (!r.responded) continue;
      time[key].push_back(static_cast<double>(r.time_ms));
      hint[key].push_back(static_cast<double>(r.hint_ms));
    }
    if (judged) fb[key].push_back(feedback_accuracy(log));
    if (log.footer && log.footer->final_greedy_accuracy) final_acc[key].push_back(*log.footer->final_greedy_accuracy);
  }
  std::vector<MetricRow> rows;
  const auto add = [&](std::string_view metric, std::string_view unit, std::map<Key, std::vector<double>>& m) {
    for (const auto& key : keys) {
      const auto it = m.find(key);
      if (it == m.end()) continue;
      rows.push_back({std::string(metric), std::string(unit), key, summarize(it->second)});
    }
  };
  add("feedback_accuracy", "session", fb);
  add("final_greedy_accuracy", "session", final_acc);
  add("time_ms", "iteration", time);
  add("hint_ms", "iteration", hint);
  return rows;
}

struct WindowRow {
  Key key;
  WindowComparison w;
};

std::vector<WindowRow> window_rows(std::span<const SessionLog> logs) {
  std::map<Key, std::vector<SessionLog>> groups;
  for (const auto& log : logs) {
    groups[{log.game_id(), std::string(session::to_string(log.condition()))}].push_back(log);
  }
  std::vector<WindowRow> rows;
  for (const auto& [key, group] : groups) {
    for (const auto metric : {Metric::time_ms, Metric::hint_ms}) {
      for (const auto mode : {WindowMode::wilcoxon, WindowMode::mann_whitney}) {
        rows.push_back({key, window_compare(group, metric, 5, mode)});
      }
    }
  }
  return rows;
}

struct Comparison {
  std::string game;
  std::string outcome;  // knowledge_gain / retention_gain
  std::string subgroup;  // "all", "low", "high"
  std::string group_a;
  std::string group_b;
  std::vector<double> a;
  std::vector<double> b;
  std::optional<StatReport> shapiro_a;
  std::optional<StatReport> shapiro_b;
  std::optional<StatReport> t;
  std::optional<StatReport> mwu;
};

std::optional<StatReport> try_stat(auto&& f) {
  try {
    return f();
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

Comparison compare(std::string game, std::string outcome, std::string subgroup, std::string ga, std::string gb,
                   std::vector<double> a, std::vector<double> b) {
  Comparison c{std::move(game), std::move(outcome), std::move(subgroup), std::move(ga), std::move(gb),
               std::move(a), std::move(b), {}, {}, {}, {}};
  c.shapiro_a = try_stat([&] { return shapiro_wilk(c.a); });
  c.shapiro_b = try_stat([&] { return shapiro_wilk(c.b); });
  c.t = try_stat([&] { return t_test_ind(c.a, c.b); });
  c.mwu = try_stat([&] { return mann_whitney_u(c.a, c.b); });
  return c;
}

std::string stat_cell(const std::optional<StatReport>& r) {
  if (!r) return "NA";
  return fmt::format("{} (p={})", num(r->statistic), num(r->p_value));
}

}  // namespace

ReportBundle build_report(std::span<const SessionLog> logs, std::span<const ScoreRow> scores,
                          const Provenance& provenance) {
  std::vector<SessionLog> sorted(logs.begin(), logs.end());
  std::sort(sorted.begin(), sorted.end(), [](const SessionLog& a, const SessionLog& b) {
    return std::tuple(a.game_id(), session::to_string(a.condition()), a.session_id()) <
           std::tuple(b.game_id(), session::to_string(b.condition()), b.session_id());
  });
  std::vector<ScoreRow> rows = scores.empty() ? scores_from_logs(sorted)
                                              : std::vector<ScoreRow>(scores.begin(), scores.end());
  std::sort(rows.begin(), rows.end(), [](const ScoreRow& a, const ScoreRow& b) {
    return std::tie(a.game, a.condition, a.session_id, a.pseudonym) <
           std::tie(b.game, b.condition, b.session_id, b.pseudonym);
  });
  if (sorted.empty() && rows.empty()) throw DataError("no session logs or scores to analyze");
  const auto gain = gain_records(rows);

  ReportBundle out;
  std::string& md = out.markdown;
  md += "# Session analysis report\n\n";
  md += fmt::format("- tool version: {}\n- seed: {}\n- input digest (sha256): {}\n", provenance.tool_version,
                    provenance.seed, provenance.input_digest);
  md += fmt::format("- sessions: {}\n- score rows: {}\n\n", sorted.size(), rows.size());
  md += "Conventions: Mann-Whitney U = min(U1, U2) with z from U1 (tie and continuity corrected) and "
        "r = z / sqrt(N); Wilcoxon on last-window minus first-window means with zero differences dropped "
        "and r = z / sqrt(n); exact p-values when the sample is at most 12; Cohen's d uses the pooled sd; "
        "all tests two-sided. Median split: low = pre-test at or below the median.\n\n";

  // Behavioral metrics.
  const auto metrics = metric_rows(sorted);
  out.metrics_csv = "metric,game,condition,unit,n,mean,sd,median,q25,q75\n";
  md += "## Behavioral metrics\n\n| metric | game | condition | unit | n | mean | sd | median | q25 | q75 |\n"
        "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& m : metrics) {
    const std::vector<std::string> cells{m.metric,          m.key.first,         m.key.second,
                                         m.unit,            std::to_string(m.s.n), num(m.s.mean),
                                         m.s.has_sd ? num(m.s.sd) : "NA", num(m.s.median), num(m.s.q25),
                                         num(m.s.q75)};
    std::vector<std::string> quoted;
    for (const auto& c : cells) quoted.push_back(csv_field(c));
    out.metrics_csv += fmt::format("{}\n", fmt::join(quoted, ","));
    md += fmt::format("| {} |\n", fmt::join(cells, " | "));
  }
  md += "\n";

  // First versus last iterations.
  const auto windows = window_rows(sorted);
  out.windows_csv =
      "game,condition,metric,mode,k,sessions,excluded,first_median,last_median,statistic,z,p_value,effect_r\n";
  md += "## First vs last 5 iterations\n\n"
        "| game | condition | metric | test | sessions | excluded | first median | last median | statistic | z | p | r |\n"
        "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [key, w] : windows) {
    const auto first = w.first.empty() ? std::optional<double>{} : std::optional<double>(median(w.first));
    const auto last = w.last.empty() ? std::optional<double>{} : std::optional<double>(median(w.last));
    const auto& r = w.report;
    const auto stat = r ? std::optional<double>(r->statistic) : std::nullopt;
    const auto z = r ? r->z : std::nullopt;
    const auto p = r ? std::optional<double>(r->p_value) : std::nullopt;
    const auto eff = r ? r->effect_size : std::nullopt;
    out.windows_csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", key.first, key.second,
                                   to_string(w.metric), to_string(w.mode), w.k, w.used, w.excluded, num(first),
                                   num(last), num(stat), num(z), num(p), num(eff));
    md += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", key.first, key.second,
                      to_string(w.metric), to_string(w.mode), w.used, w.excluded, num(first), num(last), num(stat),
                      num(z), num(p), num(eff));
  }
  md += "\n";

  // Gains.
  out.gains_csv = "pseudonym,session_id,condition,game,pre,post,retention,knowledge_gain,retention_gain\n";
  for (const auto& g : gain) {
    out.gains_csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(g.pseudonym), csv_field(g.session_id),
                                 csv_field(g.condition), csv_field(g.game), num(g.pre), num(g.post),
                                 num(g.retention), num(g.knowledge_gain), num(g.retention_gain));
  }
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> by_group;
  std::set<std::string> games;
  for (const auto& g : gain) {
    auto& cell = by_group[{g.game, g.condition}];
    cell.first.push_back(g.knowledge_gain);
    if (g.retention_gain) cell.second.push_back(*g.retention_gain);
    games.insert(g.game);
  }
  md += "## Knowledge and retention gains\n\n"
        "| game | condition | n | knowledge gain mean | sd | retention n | retention gain mean | sd |\n"
        "|---|---|---|---|---|---|---|---|\n";
  for (const auto& [key, cell] : by_group) {
    const auto k = summarize(cell.first);
    const auto r = summarize(cell.second);
    md += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", key.first, key.second, k.n, num(k.mean),
                      k.has_sd ? num(k.sd) : "NA", r.n, r.n ? num(r.mean) : "NA", r.has_sd ? num(r.sd) : "NA");
  }
  md += "\n";

  // Median split and between-condition comparisons.
  out.median_split_csv = "game,condition,session_id,pre,median,group,knowledge_gain,retention_gain\n";
  std::vector<Comparison> comparisons;
  md += "## Median split on pre-test score\n\n"
        "| game | median | group | condition | n | knowledge gain mean | retention gain mean |\n"
        "|---|---|---|---|---|---|---|\n";
  for (const auto& game_id : games) {
    std::vector<GainRecord> recs;
    for (const auto& g : gain) {
      if (g.game == game_id) recs.push_back(g);
    }
    std::set<std::string> conditions;
    for (const auto& g : recs) conditions.insert(g.condition);
    const std::vector<std::string> conds(conditions.begin(), conditions.end());

    const auto collect = [](const std::vector<GainRecord>& rs, const std::string& cond, bool retention) {
      std::vector<double> v;
      for (const auto& g : rs) {
        if (g.condition != cond) continue;
        if (!retention) v.push_back(g.knowledge_gain);
        else if (g.retention_gain) v.push_back(*g.retention_gain);
      }
      return v;
    };
    const auto add_comparisons = [&](const std::vector<GainRecord>& rs, const std::string& subgroup) {
      if (conds.size() != 2) return;
      for (const bool retention : {false, true}) {
        comparisons.push_back(compare(game_id, retention ? "retention_gain" : "knowledge_gain", subgroup,
                                      conds[0], conds[1], collect(rs, conds[0], retention),
                                      collect(rs, conds[1], retention)));
      }
    };
    add_comparisons(recs, "all");

    if (recs.size() < 2) continue;
    const auto split = median_split(recs);
    for (const auto& [name, part] : {std::pair{"low", &split.low}, std::pair{"high", &split.high}}) {
      for (const auto& g : *part) {
        out.median_split_csv += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(g.game), csv_field(g.condition),
                                            csv_field(g.session_id), num(g.pre), num(split.median), name,
                                            num(g.knowledge_gain), num(g.retention_gain));
      }
      for (const auto& cond : conds) {
        const auto k = collect(*part, cond, false);
        const auto r = collect(*part, cond, true);
        md += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", game_id, num(split.median), name, cond, k.size(),
                          k.empty() ? "NA" : num(mean(k)), r.empty() ? "NA" : num(mean(r)));
      }
      add_comparisons(*part, name);
    }
  }
  md += "\n";

  out.comparisons_csv =
      "game,outcome,subgroup,group_a,group_b,n_a,n_b,shapiro_p_a,shapiro_p_b,t,t_df,t_p,cohens_d,u,u_z,u_p,u_r\n";
  md += "## Between-condition comparisons\n\n"
        "| game | outcome | subgroup | groups | n | Shapiro-Wilk W (p) | t (p) | d | U (p) | r |\n"
        "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : comparisons) {
    const auto sp = [](const std::optional<StatReport>& r) {
      return r ? std::optional<double>(r->p_value) : std::nullopt;
    };
    out.comparisons_csv += fmt::format(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(c.game), c.outcome, c.subgroup,
        csv_field(c.group_a), csv_field(c.group_b), c.a.size(), c.b.size(), num(sp(c.shapiro_a)),
        num(sp(c.shapiro_b)), num(c.t ? std::optional<double>(c.t->statistic) : std::nullopt),
        num(c.t ? c.t->df : std::nullopt), num(sp(c.t)), num(c.t ? c.t->effect_size : std::nullopt),
        num(c.mwu ? std::optional<double>(c.mwu->statistic) : std::nullopt), num(c.mwu ? c.mwu->z : std::nullopt),
        num(sp(c.mwu)), num(c.mwu ? c.mwu->effect_size : std::nullopt));
    md += fmt::format("| {} | {} | {} | {} vs {} | {} / {} | {} / {} | {} | {} | {} | {} |\n", c.game, c.outcome,
                      c.subgroup, c.group_a, c.group_b, c.a.size(), c.b.size(), stat_cell(c.shapiro_a),
                      stat_cell(c.shapiro_b), stat_cell(c.t), num(c.t ? c.t->effect_size : std::nullopt),
                      stat_cell(c.mwu), num(c.mwu ? c.mwu->effect_size : std::nullopt));
  }
  if (comparisons.empty()) md += "\nNo game has exactly two conditions; no between-condition tests were run.\n";

  const auto stamp = fmt::format("# tool_version={} seed={} input_digest={}\n", provenance.tool_version,
                                 provenance.seed, provenance.input_digest);
  for (auto* csv : {&out.metrics_csv, &out.windows_csv, &out.gains_csv, &out.comparisons_csv, &out.median_split_csv}) {
    csv->insert(0, stamp);
  }
  return out;
}

void write_report(const ReportBundle& bundle, const std::filesystem::path& report_path) {
  auto dir = report_path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const auto put = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError(fmt::format("cannot write {}", p.string()));
    f << text;
  };
  put(report_path, bundle.markdown);
  put(dir / "metrics.csv", bundle.metrics_csv);
  put(dir / "windows.csv", bundle.windows_csv);
  put(dir / "gains.csv", bundle.gains_csv);
  put(dir / "comparisons.csv", bundle.comparisons_csv);
  put(dir / "median_split.csv", bundle.median_split_csv);
}

}  // namespace lbt::analysis
