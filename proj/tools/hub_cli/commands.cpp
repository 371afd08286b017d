#include "commands.hpp"

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <pthread.h>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lbt/analysis/report.hpp"
#include "lbt/analysis/scores.hpp"
#include "lbt/core/digest.hpp"
#include "lbt/core/error.hpp"
#include "lbt/core/version.hpp"
#include "lbt/game/content_pack.hpp"
#include "lbt/server/http_server.hpp"
#include "lbt/session/hub.hpp"
#include "lbt/sim/tutor_sim.hpp"

namespace lbt::cli {

namespace fs = std::filesystem;
using protocol::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
}

void parse_bind(const std::string& bind, server::ServeConfig& cfg) {
  const auto colon = bind.rfind(':');
  const std::string host = colon == std::string::npos ? std::string() : bind.substr(0, colon);
  const std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
  if (!host.empty()) cfg.host = host;
  try {
    std::size_t used = 0;
    cfg.port = std::stoi(port, &used);
    if (used != port.size() || cfg.port < 0 || cfg.port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw DomainError(fmt::format("--bind expects host:port, got '{}'", bind));
  }
}

struct Inputs {
  std::vector<fs::path> logs;
  std::vector<fs::path> scores;
};

bool is_scores_file(const fs::path& p) {
  return p.extension() == ".csv" && p.filename().string().rfind("scores", 0) == 0;
}

// Directories contribute *.jsonl and scores*.csv; files are taken by extension.
Inputs collect_inputs(const std::vector<fs::path>& paths) {
  Inputs in;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> entries;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file()) entries.push_back(e.path());
      }
      std::sort(entries.begin(), entries.end());
      for (const auto& e : entries) {
        if (e.extension() == ".jsonl") in.logs.push_back(e);
        else if (is_scores_file(e)) in.scores.push_back(e);
      }
    } else if (fs::is_regular_file(p)) {
      if (p.extension() == ".csv") in.scores.push_back(p);
      else in.logs.push_back(p);
    } else {
      throw DataError(fmt::format("{}: no such file or directory", p.string()));
    }
  }
  return in;
}

struct Loaded {
  std::vector<session::SessionLog> logs;
  std::vector<analysis::ScoreRow> scores;
  std::string digest;
};

Loaded load_inputs(const Inputs& in) {
  Loaded out;
  std::vector<std::pair<std::string, std::string>> parts;
  for (const auto& p : in.logs) {
    const auto text = read_file(p);
    std::istringstream ss(text);
    auto logs = session::read_session_logs(ss, p.string());
    for (auto& l : logs) out.logs.push_back(std::move(l));
    parts.emplace_back(p.filename().string(), sha256_hex(text));
  }
  for (const auto& p : in.scores) {
    const auto text = read_file(p);
    std::istringstream ss(text);
    auto rows = analysis::read_scores_csv(ss, p.string());
    out.scores.insert(out.scores.end(), rows.begin(), rows.end());
    parts.emplace_back(p.filename().string(), sha256_hex(text));
  }
  std::sort(parts.begin(), parts.end());
  std::string manifest;
  for (const auto& [name, sha] : parts) manifest += fmt::format("{} {}\n", sha, name);
  out.digest = sha256_hex(manifest);
  return out;
}

}  // namespace

fs::path default_log_dir() {
  if (const char* env = std::getenv("LBT_LOG_DIR"); env && *env) return env;
  return "logs";
}

int serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  server::ServeConfig cfg;
  try {
    cfg = args.config.empty() ? server::parse_serve_config("", "<defaults>") : server::load_serve_config(args.config);
    if (!args.bind.empty()) parse_bind(args.bind, cfg);
  } catch (const DataError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  } catch (const DomainError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  }
  if (!args.log_dir.empty()) cfg.log_dir = args.log_dir;

  auto catalog = game::GameCatalog::with_builtins();
  try {
    for (const auto& p : cfg.content_packs) catalog.add(game::load_content_pack(p));
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  }

  // Signals are taken synchronously by sigwait below; block them before any
  // thread starts so every thread inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server::SteadyClock clock;
  session::Hub hub(std::move(catalog), {.log_dir = cfg.log_dir, .auto_finalize = cfg.auto_finalize, .sink = {}});
  server::HttpServer http(hub, [&clock] { return clock.now_ms(); }, cfg.tick_ms, cfg.static_dir);
  int port = 0;
  try {
    port = http.start(cfg.host, cfg.port);
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kFailure;
  }
  fmt::print(out, "listening on http://{}:{} (logs in {})\n", cfg.host, port, cfg.log_dir.string());
  out.flush();

  int sig = 0;
  sigwait(&signals, &sig);
  http.stop();
  hub.shutdown(clock.now_ms());
  fmt::print(out, "stopped on signal {}; {} session log(s) flushed\n", sig, hub.list().size());
  return kOk;
}

int simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<session::Condition> conditions;
  if (args.condition == "lbt" || args.condition == "both") conditions.push_back(session::Condition::learning_by_teaching);
  if (args.condition == "self" || args.condition == "both") conditions.push_back(session::Condition::self_practice);
  if (conditions.empty()) {
    fmt::print(err, "error: --condition must be lbt, self or both\n");
    return kUsage;
  }

  game::GameSpec game;
  try {
    game = game::resolve_game(args.game);
  } catch (const game::ContentPackError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  }

  tutee::LearnerConfig learner;
  learner.alpha = args.alpha;
  sim::TutorProfile profile;
  profile.feedback_accuracy = args.accuracy;
  sim::BatchOptions options;
  options.keep_logs = true;
  options.workers = args.workers;
  options.questionnaire = args.questionnaire;

  std::vector<sim::BatchResult> batches;
  try {
    learner.validate();
    profile.validate();
    for (std::size_t c = 0; c < conditions.size(); ++c) {
      options.condition = conditions[c];
      batches.push_back(sim::run_batch(game, learner, profile, args.sessions, c == 0 ? args.seed : derive_seed(args.seed, c), options));
    }
  } catch (const DomainError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  }

  const auto input_digest = sha256_hex(game::emit_content_pack(game));
  const fs::path dir = args.out.empty() ? default_log_dir() : args.out;

  std::string jsonl;
  std::vector<analysis::ScoreRow> scores;
  json batch_json = json::array();
  for (const auto& b : batches) {
    for (const auto& log : b.logs) jsonl += session::to_jsonl(log);
    scores.insert(scores.end(), b.scores.begin(), b.scores.end());
    batch_json.push_back(sim::to_json(b));
  }
  const std::vector<std::string> comment = {
      fmt::format("tool_version={} seed={} input_digest={}", kToolVersion, args.seed, input_digest),
      fmt::format("game={} accuracy={} sessions={} condition={} alpha={}", game.id, args.accuracy, args.sessions,
                  args.condition, args.alpha)};
  const json doc = {{"provenance", {{"tool_version", kToolVersion}, {"seed", args.seed}, {"input_digest", input_digest}}},
                    {"batches", batch_json}};
  try {
    write_file(dir / "sessions.jsonl", jsonl);
    write_file(dir / "scores.csv", analysis::write_scores_csv(scores, comment));
    write_file(dir / "batch.json", doc.dump(2) + "\n");
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  }

  for (const auto& b : batches) {
    fmt::print(out, "{} {}: {} sessions, seed {}\n", b.game_id, session::to_string(b.condition), b.n_sessions, b.seed);
    if (!b.final_accuracy.empty()) {
      const double m = b.final_summary.mean;
      fmt::print(out, "  final accuracy {:.3f} (95% CI {:.3f} to {:.3f}), feedback accuracy {:.3f}\n", m,
                 m - 1.96 * b.final_se, m + 1.96 * b.final_se, b.mean_feedback_accuracy);
    }
    fmt::print(out, "  mean time {:.1f} ms, mean hint time {:.1f} ms, prompted {:.3f}\n", b.mean_time_ms,
               b.mean_hint_ms, b.prompted_rate);
  }
  fmt::print(out, "wrote {}\n", dir.string());
  return kOk;
}

int analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto loaded = load_inputs(collect_inputs(args.inputs));
    if (loaded.logs.empty() && loaded.scores.empty()) {
      fmt::print(err, "no data: no session logs or scores found\n");
      return kDataError;
    }
    const analysis::Provenance prov{std::string(kToolVersion), args.seed, loaded.digest};
    const auto bundle = analysis::build_report(loaded.logs, loaded.scores, prov);
    analysis::write_report(bundle, args.report);
    fmt::print(out, "{} session log(s), {} score row(s) -> {}\n", loaded.logs.size(), loaded.scores.size(),
               args.report.string());
    return kOk;
  } catch (const DataError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  } catch (const DomainError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  }
}

int export_csv(const ExportArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto in = collect_inputs(args.inputs);
    const auto loaded = load_inputs({in.logs, {}});
    if (loaded.logs.empty()) {
      fmt::print(err, "no data: no session logs found\n");
      return kDataError;
    }
    const auto rows = analysis::scores_from_logs(loaded.logs);
    const std::vector<std::string> comment = {
        fmt::format("tool_version={} seed={} input_digest={}", kToolVersion, args.seed, loaded.digest)};
    write_file(args.out, analysis::write_scores_csv(rows, comment));
    fmt::print(out, "{} row(s) -> {}\n", rows.size(), args.out.string());
    return kOk;
  } catch (const DataError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataError;
  }
}

int content_validate(const std::vector<std::string>& packs, std::ostream& out, std::ostream& err) {
  int status = kOk;
  for (const auto& p : packs) {
    try {
      const auto game = game::resolve_game(p);
      fmt::print(out, "{}: ok ({}, {} questions, {} options)\n", p, game.id, game.n_states(), game.n_actions);
    } catch (const game::ContentPackError& e) {
      fmt::print(err, "{}\n", e.what());
      status = kDataError;
    } catch (const std::exception& e) {
      fmt::print(err, "{}: {}\n", p, e.what());
      status = kDataError;
    }
  }
  return status;
}

}  // namespace lbt::cli
