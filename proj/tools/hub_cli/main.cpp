#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "lbt/core/version.hpp"

int main(int argc, char** argv) {
  using namespace lbt::cli;

  CLI::App app{"Learning-by-teaching robot hub: serve sessions, simulate tutors, analyze logs"};
  app.set_version_flag("--version", std::string(lbt::kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::filesystem::path log_dir;
  app.add_option("--seed", seed, "Global seed recorded in every output")->capture_default_str();
  app.add_option("--log-dir", log_dir, "Log directory (default: $LBT_LOG_DIR, else ./logs)");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the session hub with its HTTP control endpoints");
  serve_cmd->add_option("--config", serve_args.config, "YAML config file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--bind", serve_args.bind, "host:port to listen on (port 0 picks a free port)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run simulated tutoring sessions");
  sim_cmd->add_option("--game", sim_args.game, "body, grammar or a content pack file")->capture_default_str();
  sim_cmd->add_option("--accuracy", sim_args.accuracy, "Probability of a truthful judgment")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sim_cmd->add_option("--sessions", sim_args.sessions, "Sessions per condition")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1'000'000}))
      ->capture_default_str();
  sim_cmd->add_option("--condition", sim_args.condition, "lbt, self or both")
      ->check(CLI::IsMember({"lbt", "self", "both"}))
      ->capture_default_str();
  sim_cmd->add_option("--alpha", sim_args.alpha, "Learning rate in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sim_cmd->add_option("--workers", sim_args.workers, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}))
      ->capture_default_str();
  sim_cmd->add_flag("!--no-questionnaire", sim_args.questionnaire, "Skip the questionnaire");
  sim_cmd->add_option("--out", sim_args.out, "Output directory (default: the log directory)");

  AnalyzeArgs an_args;
  auto* an_cmd = app.add_subcommand("analyze", "Build the report and tables from logs and scores");
  an_cmd->add_option("inputs", an_args.inputs, "Log files, scores CSVs or directories")->required();
  an_cmd->add_option("--report", an_args.report, "Report path; tables are written next to it")->required();

  ExportArgs ex_args;
  auto* ex_cmd = app.add_subcommand("export-csv", "Export knowledge-test scores from session logs");
  ex_cmd->add_option("inputs", ex_args.inputs, "Log files or directories")->required();
  ex_cmd->add_option("--out", ex_args.out, "Output CSV")->required();

  std::vector<std::string> packs;
  auto* content_cmd = app.add_subcommand("content", "Content pack tools");
  content_cmd->require_subcommand(1);
  auto* validate_cmd = content_cmd->add_subcommand("validate", "Validate content packs");
  validate_cmd->add_option("packs", packs, "Pack files or built-in names")->required();
  auto* validate_alias = app.add_subcommand("content-validate", "Same as `content validate`");
  validate_alias->add_option("packs", packs, "Pack files or built-in names")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (log_dir.empty()) log_dir = default_log_dir();
  if (*serve_cmd) {
    serve_args.log_dir = app.get_option("--log-dir")->count() ? log_dir : std::filesystem::path{};
    return serve(serve_args, std::cout, std::cerr);
  }
  if (*sim_cmd) {
    sim_args.seed = seed;
    if (sim_args.out.empty()) sim_args.out = log_dir;
    return simulate(sim_args, std::cout, std::cerr);
  }
  if (*an_cmd) {
    an_args.seed = seed;
    return analyze(an_args, std::cout, std::cerr);
  }
  if (*ex_cmd) {
    ex_args.seed = seed;
    return export_csv(ex_args, std::cout, std::cerr);
  }
  return content_validate(packs, std::cout, std::cerr);
}
