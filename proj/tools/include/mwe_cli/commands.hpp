#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mwe_cli/run_config.hpp"

namespace mwe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    ///< bad arguments, config or input files
inline constexpr int kExitRuntime = 3;  ///< training or evaluation failure

/// Runs the configured training and writes checkpoints, logs and the
/// manifest into config.out_dir. Throws on failure.
void cmd_train(const RunConfig& config, std::ostream& out);

struct EvaluateOptions {
  std::vector<std::filesystem::path> checkpoints;  ///< files or directories of *.mwec
  std::vector<std::pair<std::string, std::filesystem::path>> langs;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::vector<std::pair<std::string, std::filesystem::path>> dicts;         ///< "src-tgt" -> file
  std::vector<std::pair<std::string, std::filesystem::path>> similarities;  ///< "l1-l2" -> file
  std::vector<std::size_t> ks = {1, 5};
  std::size_t csls_n = 10;
  std::filesystem::path out_dir;  ///< empty: print only
};

void cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

struct TranslateOptions {
  std::filesystem::path checkpoint;
  std::vector<std::pair<std::string, std::filesystem::path>> langs;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::string src;
  std::string tgt;
  std::size_t k = 5;
  std::size_t csls_n = 10;
};

/// Reads one word per line from `in`; writes "word\tcand1\tscore1..." or
/// "word\t<OOV>" lines.
void cmd_translate(const TranslateOptions& options, std::istream& in, std::ostream& out);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mwe::cli
