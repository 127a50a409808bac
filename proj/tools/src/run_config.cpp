#include "mwe_cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <mwe/errors.hpp>

namespace mwe::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(std::string_view(s).substr(pos, next - pos)));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ArgumentError("invalid value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ArgumentError("invalid boolean '" + value + "' for " + key);
}

template <typename T>
std::string format(T v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format(v[i]);
  return out;
}

std::string join_paths(const std::vector<std::pair<std::string, std::filesystem::path>>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].first + "=" + v[i].second.string();
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  if (trim(value).empty()) return out;
  for (const auto& item : split(value, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MWE_NUM(name, member, type)                                                                       \
  {                                                                                                       \
    name, {                                                                                               \
      [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_number<type>(k, v); }, \
          [](const RunConfig& c) { return format(c.member); }                                             \
    }                                                                                                     \
  }
#define MWE_BOOL(name, member)                                                                      \
  {                                                                                                 \
    name, {                                                                                         \
      [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
          [](const RunConfig& c) { return format_bool(c.member); }                                  \
    }                                                                                               \
  }

// Ordered table of every setting; the order is the manifest order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"langs",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.langs.clear();
          for (auto& [code, path] : parse_assignments(v)) c.langs.emplace_back(code, path);
        },
        [](const RunConfig& c) { return join_paths(c.langs); }}},
      {"target", {[](RunConfig& c, const std::string&, const std::string& v) { c.target = v; },
                  [](const RunConfig& c) { return c.target; }}},
      {"pivot", {[](RunConfig& c, const std::string&, const std::string& v) { c.pivot = v; },
                 [](const RunConfig& c) { return c.pivot; }}},
      {"mode", {[](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_mode(v); },
                [](const RunConfig& c) { return mode_name(c.mode); }}},
      {"out_dir", {[](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
                   [](const RunConfig& c) { return c.out_dir.string(); }}},
      {"seed",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_number<std::uint64_t>(k, v); },
        [](const RunConfig& c) { return format(c.seed); }}},
      MWE_BOOL("skip_mpsr", skip_mpsr),
      MWE_NUM("max_vocab", max_vocab, std::size_t),
      MWE_NUM("threads", threads, std::size_t),
      {"train_dicts",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.train_dicts.clear();
          for (auto& [pair, path] : parse_assignments(v)) c.train_dicts.emplace_back(pair, path);
        },
        [](const RunConfig& c) { return join_paths(c.train_dicts); }}},
      MWE_NUM("mat.k", mat.k, std::size_t),
      MWE_NUM("mat.batch_size", mat.batch_size, std::size_t),
      MWE_NUM("mat.dis_lr", mat.dis_lr, double),
      MWE_NUM("mat.map_lr", mat.map_lr, double),
      MWE_NUM("mat.lr_decay", mat.lr_decay, double),
      MWE_NUM("mat.lr_shrink", mat.lr_shrink, double),
      MWE_NUM("mat.epochs", mat.epochs, std::size_t),
      MWE_NUM("mat.steps_per_epoch", mat.steps_per_epoch, std::size_t),
      MWE_NUM("mat.dis_sample_cutoff", mat.dis_sample_cutoff, std::size_t),
      MWE_NUM("mat.smoothing", mat.smoothing, double),
      MWE_NUM("mat.beta", mat.beta, double),
      MWE_BOOL("mat.project_gradients", mat.project_gradients),
      {"mat.dis_hidden",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.mat.dis_hidden = parse_list<int>(k, v); },
        [](const RunConfig& c) { return join(c.mat.dis_hidden); }}},
      MWE_NUM("mat.dis_dropout", mat.dis_dropout, double),
      MWE_NUM("mat.dis_leaky_slope", mat.dis_leaky_slope, double),
      MWE_NUM("mat.log_every", mat.log_every, std::size_t),
      MWE_NUM("mpsr.epochs", mpsr.epochs, std::size_t),
      MWE_NUM("mpsr.steps_per_epoch", mpsr.steps_per_epoch, std::size_t),
      MWE_NUM("mpsr.batch_size", mpsr.batch_size, std::size_t),
      MWE_NUM("mpsr.lr", mpsr.lr, double),
      MWE_NUM("mpsr.lr_decay", mpsr.lr_decay, double),
      MWE_NUM("mpsr.lr_shrink", mpsr.lr_shrink, double),
      MWE_NUM("mpsr.lexicon_cutoff", mpsr.lexicon_cutoff, std::size_t),
      MWE_NUM("mpsr.csls_n", mpsr.csls_n, std::size_t),
      MWE_BOOL("mpsr.reinduce_every_epoch", mpsr.reinduce_every_epoch),
      MWE_NUM("mpsr.min_lexicon", mpsr.min_lexicon, std::size_t),
      MWE_NUM("mpsr.beta", mpsr.beta, double),
      MWE_BOOL("mpsr.project_gradients", mpsr.project_gradients),
      MWE_NUM("mpsr.log_every", mpsr.log_every, std::size_t),
      {"validation.top_k",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.mat.validation.top_k = c.mpsr.validation.top_k = parse_number<std::size_t>(k, v);
        },
        [](const RunConfig& c) { return format(c.mat.validation.top_k); }}},
      {"validation.csls_n",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.mat.validation.csls_n = c.mpsr.validation.csls_n = parse_number<std::size_t>(k, v);
        },
        [](const RunConfig& c) { return format(c.mat.validation.csls_n); }}},
      {"validation.weights",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.mat.validation.weights = c.mpsr.validation.weights = parse_list<double>(k, v);
        },
        [](const RunConfig& c) { return join(c.mat.validation.weights); }}},
  };
  return table;
}

#undef MWE_NUM
#undef MWE_BOOL

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw ArgumentError("expected name=value, got '" + item + "'");
    }
    out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(*this, key, trim(value));
      return;
    }
  }
  throw ArgumentError("unknown setting '" + key + "'");
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& [name, field] : fields()) out << name << '=' << field.get(*this) << '\n';
}

void RunConfig::validate(bool check_paths) const {
  if (langs.size() < 2) throw ArgumentError("at least two languages are required (langs=code=path,...)");
  std::map<std::string, int> seen;
  for (const auto& [code, path] : langs) {
    if (code.empty()) throw ArgumentError("empty language code");
    if (seen[code]++) throw ArgumentError("language '" + code + "' listed twice");
    if (check_paths && !std::filesystem::exists(path)) {
      throw IoError("embedding file for '" + code + "' not found: " + path.string());
    }
  }
  if (target.empty()) throw ArgumentError("target language is not set");
  if (!seen.count(target)) throw ArgumentError("target '" + target + "' is not among the languages");
  if (mode == Mode::kPivot && !pivot.empty() && !seen.count(pivot)) {
    throw ArgumentError("pivot '" + pivot + "' is not among the languages");
  }
  if (max_vocab == 0) throw ArgumentError("max_vocab must be positive");
  if (threads == 0) throw ArgumentError("threads must be positive");
  if (mode == Mode::kSupervisedProcrustes) {
    for (const auto& [code, path] : langs) {
      if (code == target) continue;
      bool found = false;
      for (const auto& [pair, dict] : train_dicts) found = found || pair == code + "-" + target;
      if (!found) throw ArgumentError("supervised-procrustes needs train_dicts entry " + code + "-" + target);
    }
  }
  for (const auto& [pair, path] : train_dicts) {
    if (pair.find('-') == std::string::npos) throw ArgumentError("train_dicts keys look like src-tgt, got '" + pair + "'");
    if (check_paths && !std::filesystem::exists(path)) throw IoError("dictionary not found: " + path.string());
  }
  mat.validate();
  mpsr.validate();
}

void read_config_file(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(path.string(), line_no, "expected key=value");
    try {
      config.set(trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ArgumentError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
}

}  // namespace mwe::cli
