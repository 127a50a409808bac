#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <mwe/pipeline.hpp>

namespace mwe::cli {

/// Everything a training run depends on. Serialized as flat key=value lines;
/// the manifest written next to the checkpoints re-creates the run exactly.
struct RunConfig {
  std::vector<std::pair<std::string, std::filesystem::path>> langs;  ///< code -> embedding file
  std::string target;
  std::string pivot;  ///< pivot mode; defaults to target
  Mode mode = Mode::kMultilingual;
  std::filesystem::path out_dir = "mwe_out";
  std::uint64_t seed = 0;
  bool skip_mpsr = false;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::size_t threads = 1;
  /// "src-tgt" -> dictionary file (supervised-procrustes).
  std::vector<std::pair<std::string, std::filesystem::path>> train_dicts;
  MatConfig mat;
  MpsrConfig mpsr;

  /// Applies one key=value setting. Throws ArgumentError for unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Cross-field checks (target among languages, positive sizes, ...). With
  /// `check_paths` the embedding and dictionary files must exist.
  void validate(bool check_paths) const;

  /// Every key, one per line, in a fixed order.
  void write(std::ostream& out) const;
};

/// Reads a key=value file; '#' starts a comment, blank lines are skipped.
/// Throws IoError / ParseError.
void read_config_file(const std::filesystem::path& path, RunConfig& config);

/// "a=x,b=y" -> {(a, x), (b, y)}. Throws ArgumentError on a malformed item.
std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text);

}  // namespace mwe::cli
