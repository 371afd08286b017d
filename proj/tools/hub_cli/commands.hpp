#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lbt::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kDataError = 3 };

// $LBT_LOG_DIR, else ./logs
std::filesystem::path default_log_dir();

struct ServeArgs {
  std::filesystem::path config;
  std::string bind;  // host:port, overrides the config
  std::filesystem::path log_dir;
};

struct SimulateArgs {
  std::string game = "body";
  double accuracy = 0.89;
  std::size_t sessions = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::string condition = "lbt";  // lbt, self or both
  double alpha = 0.3;
  std::size_t workers = 1;
  bool questionnaire = true;
};

struct AnalyzeArgs {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path report;
  std::uint64_t seed = 0;
};

struct ExportArgs {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path out;
  std::uint64_t seed = 0;
};

int serve(const ServeArgs& args, std::ostream& out, std::ostream& err);
int simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);
int export_csv(const ExportArgs& args, std::ostream& out, std::ostream& err);
int content_validate(const std::vector<std::string>& packs, std::ostream& out, std::ostream& err);

}  // namespace lbt::cli
