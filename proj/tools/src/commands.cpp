#include "mwe_cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

#include <mwe/csls.hpp>
#include <mwe/errors.hpp>
#include <mwe/eval_harness.hpp>
#include <mwe/mapping_set.hpp>
#include <mwe/pipeline.hpp>

namespace mwe::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::pair<std::string, std::string> split_pair(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == key.size()) {
    throw ArgumentError("expected a language pair like de-en, got '" + key + "'");
  }
  return {key.substr(0, dash), key.substr(dash + 1)};
}

std::vector<EmbeddingSpace> load_spaces(const std::vector<std::pair<std::string, std::filesystem::path>>& langs,
                                        std::size_t max_vocab) {
  std::vector<EmbeddingSpace> spaces;
  for (const auto& [code, path] : langs) spaces.push_back(load_text_embeddings(path, max_vocab, code));
  common_dim(spaces);
  return spaces;
}

std::size_t lang_index(const std::vector<std::pair<std::string, std::filesystem::path>>& langs,
                       const std::string& code) {
  for (std::size_t i = 0; i < langs.size(); ++i) {
    if (langs[i].first == code) return i;
  }
  throw ArgumentError("language '" + code + "' has no embedding file (--langs)");
}

void write_validation_history(std::ostream& out, const PipelineResult& result) {
  out << "stage,epoch,val_score\n" << std::setprecision(10);
  for (const auto& h : result.mat.history) out << "mat," << h.epoch << ',' << h.val_score << '\n';
  if (result.mpsr) {
    for (const auto& h : result.mpsr->history) out << "mpsr," << h.epoch << ',' << h.val_score << '\n';
  }
}

void write_cost(const std::filesystem::path& path, Mode mode, const CostRecord& cost) {
  auto out = open_output(path);
  out << "mode,bwe_equivalents,training_runs,wall_seconds\n"
      << mode_name(mode) << ',' << cost.bwe_equivalents << ',' << cost.training_runs << ',' << cost.wall_seconds
      << '\n';
}

void write_report(const std::filesystem::path& dir, const ValidationReport& report) {
  auto csv = open_output(dir / "validation_report.csv");
  report.print_csv(csv);
  auto txt = open_output(dir / "validation_report.txt");
  report.print_table(txt);
}

}  // namespace

void cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate(true);
  const auto spaces = load_spaces(config.langs, config.max_vocab);
  const std::size_t target = lang_index(config.langs, config.target);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create '" + config.out_dir.string() + "': " + ec.message());
  {
    auto manifest = open_output(config.out_dir / "manifest.txt");
    config.write(manifest);
  }

  PipelineConfig pc{config.mat, config.mpsr, config.skip_mpsr};
  pc.mat.seed = config.seed;
  pc.mpsr.seed = config.seed;

  out << "mode " << mode_name(config.mode) << ", " << spaces.size() << " languages, target " << config.target
      << ", seed " << config.seed << '\n';

  if (config.mode == Mode::kMultilingual) {
    auto mat_log = [&out](const TrainLogRecord& r) {
      if (!std::isnan(r.val_score)) out << "mat epoch " << r.epoch << " validation " << r.val_score << '\n';
    };
    auto mpsr_log = [&out](const RefineLogRecord& r) {
      if (!std::isnan(r.val_score)) out << "mpsr epoch " << r.epoch << " validation " << r.val_score << '\n';
    };
    const auto start = std::chrono::steady_clock::now();
    const auto result = train_pipeline(spaces, target, pc, mat_log, mpsr_log);
    CostRecord cost{bwe_cost(config.mode, spaces.size()), 1,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    save_checkpoint({result.mappings, config.seed}, config.out_dir / "checkpoint.mwec");
    {
      auto f = open_output(config.out_dir / "train_log.csv");
      write_train_log_csv(f, result.mat.log);
    }
    if (result.mpsr) {
      auto f = open_output(config.out_dir / "refine_log.csv");
      write_refine_log_csv(f, result.mpsr->log);
    }
    {
      auto f = open_output(config.out_dir / "validation.csv");
      write_validation_history(f, result);
    }
    write_report(config.out_dir, multilingual_validation(spaces, result.mappings, pc.mat.validation));
    write_cost(config.out_dir / "cost.csv", config.mode, cost);
    out << "best validation " << result.score << ", checkpoint " << (config.out_dir / "checkpoint.mwec").string()
        << '\n';
    return;
  }

  BaselineOptions options;
  options.mode = config.mode;
  options.target = target;
  options.pivot = lang_index(config.langs, config.pivot.empty() ? config.target : config.pivot);
  options.pipeline = pc;
  options.threads = config.threads;
  for (const auto& [key, path] : config.train_dicts) {
    const auto [s, t] = split_pair(key);
    const std::size_t si = lang_index(config.langs, s);
    const std::size_t ti = lang_index(config.langs, t);
    options.train_dicts.emplace(std::make_pair(si, ti), load_dictionary(path, s, t));
  }
  const auto result = run_baseline_comparison(spaces, options);
  write_cost(config.out_dir / "cost.csv", config.mode, result.cost);
  if (result.joint) {
    save_checkpoint({*result.joint, config.seed}, config.out_dir / "checkpoint.mwec");
    write_report(config.out_dir, multilingual_validation(spaces, *result.joint, pc.mat.validation));
    out << "checkpoint " << (config.out_dir / "checkpoint.mwec").string() << '\n';
  } else {
    const auto dir = config.out_dir / "pairs";
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& m : result.maps) {
      save_checkpoint({pair_mapping_set(spaces, m), config.seed},
                      dir / (spaces[m.src].lang() + "-" + spaces[m.tgt].lang() + ".mwec"));
    }
    out << result.maps.size() << " pair checkpoints in " << dir.string() << '\n';
  }
  out << "cost: " << result.cost.bwe_equivalents << " BWE-equivalents, " << result.cost.training_runs
      << " training runs, " << result.cost.wall_seconds << " s\n";
}

namespace {

std::vector<MappingSet> load_checkpoints(const std::vector<std::filesystem::path>& paths) {
  std::vector<MappingSet> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".mwec") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back(load_checkpoint(f).mappings);
    } else {
      if (!std::filesystem::exists(p)) throw IoError("checkpoint not found: " + p.string());
      out.push_back(load_checkpoint(p).mappings);
    }
  }
  if (out.empty()) throw IoError("no checkpoints found");
  return out;
}

bool contains(const MappingSet& m, const std::string& lang) {
  return std::find(m.langs().begin(), m.langs().end(), lang) != m.langs().end();
}

// The checkpoint trained for exactly this direction wins over a joint one.
const MappingSet& pick_checkpoint(const std::vector<MappingSet>& sets, const std::string& s, const std::string& t) {
  const MappingSet* any = nullptr;
  for (const auto& m : sets) {
    if (!contains(m, s) || !contains(m, t)) continue;
    if (m.size() == 2 && m.lang(0) == s && m.lang(m.target()) == t) return m;
    if (!any) any = &m;
  }
  if (!any) throw ArgumentError("no checkpoint covers " + s + "-" + t);
  return *any;
}

}  // namespace

void cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  if (options.dicts.empty() && options.similarities.empty()) {
    throw ArgumentError("nothing to evaluate: pass --dict and/or --sim");
  }
  for (auto k : options.ks) {
    if (k == 0) throw ArgumentError("k must be positive");
  }
  const auto sets = load_checkpoints(options.checkpoints);

  // load only languages that are used, but keep --langs order for tables
  std::vector<std::string> codes;
  for (const auto& [code, path] : options.langs) codes.push_back(code);
  std::map<std::size_t, EmbeddingSpace> loaded;
  auto space = [&](const std::string& code) -> const EmbeddingSpace& {
    const std::size_t i = lang_index(options.langs, code);
    auto it = loaded.find(i);
    if (it == loaded.end()) {
      it = loaded.emplace(i, load_text_embeddings(options.langs[i].second, options.max_vocab, code)).first;
    }
    return it->second;
  };
  auto check_dim = [](const MappingSet& m, const EmbeddingSpace& s) {
    if (m.dim() != s.dim()) {
      throw ShapeError("checkpoint dimension " + std::to_string(m.dim()) + " does not match '" + s.lang() +
                       "' embeddings of dimension " + std::to_string(s.dim()));
    }
  };

  std::vector<std::pair<std::string, EvalDictionary>> dicts;
  for (const auto& [key, path] : options.dicts) {
    const auto [s, t] = split_pair(key);
    dicts.emplace_back(key, load_dictionary(path, s, t));
  }
  std::vector<std::pair<std::string, SimilarityDataset>> sims;
  for (const auto& [key, path] : options.similarities) {
    const auto [a, b] = split_pair(key);
    sims.emplace_back(path.filename().string(), load_similarity_dataset(path, a, b));
  }

  PrecisionTable table;
  table.langs = codes;
  for (const auto& [key, dict] : dicts) {
    const EmbeddingSpace& s = space(dict.src_lang);
    const EmbeddingSpace& t = space(dict.tgt_lang);
    const MappingSet& m = pick_checkpoint(sets, dict.src_lang, dict.tgt_lang);
    check_dim(m, s);
    table.pairs.push_back({lang_index(options.langs, dict.src_lang), lang_index(options.langs, dict.tgt_lang),
                           word_translation_precision(dict, s, t, m.encoder(m.index_of(dict.src_lang)),
                                                      m.encoder(m.index_of(dict.tgt_lang)), options.ks,
                                                      options.csls_n)});
  }
  std::vector<ClwsRow> clws;
  for (const auto& [name, data] : sims) {
    const EmbeddingSpace& a = space(data.lang1);
    const EmbeddingSpace& b = space(data.lang2);
    const MappingSet& m = pick_checkpoint(sets, data.lang1, data.lang2);
    check_dim(m, a);
    clws.push_back({lang_index(options.langs, data.lang1), lang_index(options.langs, data.lang2), name,
                    evaluate_clws(data, a, b, m.encoder(m.index_of(data.lang1)), m.encoder(m.index_of(data.lang2)))});
  }

  if (!table.pairs.empty()) {
    for (auto k : options.ks) table.print_table(out, k);
    for (const auto& p : table.pairs) {
      out << codes[p.src] << '-' << codes[p.tgt] << " coverage " << p.result.evaluated << '/' << p.result.total
          << '\n';
    }
  }
  if (!clws.empty()) print_clws_table(out, codes, clws);

  if (!options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw IoError("cannot create '" + options.out_dir.string() + "': " + ec.message());
    if (!table.pairs.empty()) {
      auto csv = open_output(options.out_dir / "precision.csv");
      table.print_csv(csv);
      auto txt = open_output(options.out_dir / "precision.txt");
      for (auto k : options.ks) table.print_table(txt, k);
    }
    if (!clws.empty()) {
      auto csv = open_output(options.out_dir / "clws.csv");
      print_clws_csv(csv, codes, clws);
      auto txt = open_output(options.out_dir / "clws.txt");
      print_clws_table(txt, codes, clws);
    }
  }
}

void cmd_translate(const TranslateOptions& options, std::istream& in, std::ostream& out) {
  if (options.k == 0) throw ArgumentError("k must be positive");
  if (options.csls_n == 0) throw ArgumentError("csls-n must be positive");
  const MappingSet m = load_checkpoint(options.checkpoint).mappings;
  const std::size_t si = m.index_of(options.src);
  const std::size_t ti = m.index_of(options.tgt);
  const EmbeddingSpace src =
      load_text_embeddings(options.langs.at(lang_index(options.langs, options.src)).second, options.max_vocab,
                           options.src);
  const EmbeddingSpace tgt =
      options.src == options.tgt
          ? src
          : load_text_embeddings(options.langs.at(lang_index(options.langs, options.tgt)).second,
                                 options.max_vocab, options.tgt);
  if (m.dim() != src.dim() || m.dim() != tgt.dim()) throw ShapeError("checkpoint dimension does not match embeddings");

  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(b, e - b + 1));
  }
  std::vector<std::size_t> rows;
  for (const auto& w : words) {
    if (auto r = src.vocab().find(w)) rows.push_back(*r);
  }
  std::vector<NeighborResult> neighbors;
  if (!rows.empty()) {
    Matrix x(static_cast<Eigen::Index>(rows.size()), src.dim());
    for (std::size_t q = 0; q < rows.size(); ++q) {
      x.row(static_cast<Eigen::Index>(q)) = src.matrix().row(static_cast<Eigen::Index>(rows[q]));
    }
    const Matrix queries = map_rows(x, m.encoder(si));
    const Matrix keys = map_rows(tgt.matrix(), m.encoder(ti));
    CslsPenalties pen;
    pen.queries = mean_topk_cosine(queries, keys, std::min(options.csls_n, tgt.size()));
    pen.keys = mean_topk_cosine(keys, map_rows(src.matrix(), m.encoder(si)), std::min(options.csls_n, src.size()));
    neighbors = csls_topk(queries, keys, options.csls_n, std::min(options.k, tgt.size()), pen);
  }
  std::size_t q = 0;
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(6);
  for (const auto& w : words) {
    out << w;
    if (!src.vocab().contains(w)) {
      out << "\t<OOV>\n";
      continue;
    }
    const auto& nb = neighbors[q++];
    for (std::size_t r = 0; r < nb.indices.size(); ++r) out << '\t' << tgt.vocab().word(nb.indices[r]) << '\t' << nb.scores[r];
    out << '\n';
  }
  out.flags(flags);
}

namespace {

template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    fn();
    return kExitOk;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::vector<std::pair<std::string, std::filesystem::path>> to_paths(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const auto& item : items) {
    for (auto& [k, v] : parse_assignments(item)) out.emplace_back(k, v);
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised multilingual word embeddings: train, evaluate, translate"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train mappings (MAT + MPSR, or a baseline mode)");
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> mode, target, pivot, langs, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_vocab, threads;
  std::vector<std::string> train_dicts;
  bool skip_mpsr = false;
  train->add_option("--config", config_path, "key=value config file (flags override it)");
  train->add_option("--set", sets, "Override any config key, e.g. --set mat.k=2");
  train->add_option("--mode", mode, "multilingual | pivot | direct | supervised-procrustes");
  train->add_option("--target", target, "Target (shared-space) language code");
  train->add_option("--pivot", pivot, "Pivot language for --mode pivot (default: target)");
  train->add_option("--langs", langs, "code=embedding_file,...");
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--max-vocab", max_vocab, "Words kept per language");
  train->add_option("--threads", threads, "Parallel pair runs (pivot/direct)");
  train->add_option("--train-dict", train_dicts, "src-tgt=dictionary (supervised-procrustes)");
  train->add_flag("--skip-mpsr", skip_mpsr, "Stop after adversarial training");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Word translation and cross-lingual similarity scores");
  EvaluateOptions eval;
  std::vector<std::string> eval_langs, eval_dicts, eval_sims;
  std::string eval_config;
  std::optional<std::size_t> eval_max_vocab;
  evaluate->add_option("--checkpoint", eval.checkpoints, "Checkpoint file or directory of pair checkpoints")
      ->required();
  evaluate->add_option("--langs", eval_langs, "code=embedding_file,...");
  evaluate->add_option("--config", eval_config, "Take languages and max_vocab from a training manifest");
  evaluate->add_option("--dict", eval_dicts, "src-tgt=dictionary_file");
  evaluate->add_option("--sim", eval_sims, "l1-l2=similarity_file (word1<TAB>word2<TAB>score)");
  evaluate->add_option("--k", eval.ks, "Precision cutoffs")->delimiter(',');
  evaluate->add_option("--csls-n", eval.csls_n, "CSLS neighbourhood size");
  evaluate->add_option("--max-vocab", eval_max_vocab, "Words kept per language");
  evaluate->add_option("--out", eval.out_dir, "Write precision/clws CSV and text tables here");

  // translate
  auto* translate = app.add_subcommand("translate", "Translate words read from stdin");
  TranslateOptions tr;
  std::vector<std::string> tr_langs;
  std::string tr_config;
  std::optional<std::size_t> tr_max_vocab;
  translate->add_option("--checkpoint", tr.checkpoint, "Checkpoint file")->required();
  translate->add_option("--langs", tr_langs, "code=embedding_file,...");
  translate->add_option("--config", tr_config, "Take languages and max_vocab from a training manifest");
  translate->add_option("--src", tr.src, "Source language")->required();
  translate->add_option("--tgt", tr.tgt, "Target language")->required();
  translate->add_option("-k", tr.k, "Candidates per word");
  translate->add_option("--csls-n", tr.csls_n, "CSLS neighbourhood size");
  translate->add_option("--max-vocab", tr_max_vocab, "Words kept per language");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // languages from an optional manifest, then --langs
  auto resolve_langs = [](const std::string& config, const std::vector<std::string>& flags,
                          std::optional<std::size_t> max_flag, auto& langs_out, std::size_t& max_out) {
    if (!config.empty()) {
      RunConfig rc;
      read_config_file(config, rc);
      langs_out = rc.langs;
      max_out = rc.max_vocab;
    }
    if (!flags.empty()) langs_out = to_paths(flags);
    if (max_flag) max_out = *max_flag;
    if (langs_out.empty()) throw ArgumentError("no languages given (--langs or --config)");
  };

  if (train->parsed()) {
    RunConfig config;
    const int code = guarded(
        [&] {
          if (!config_path.empty()) read_config_file(config_path, config);
          for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + s + "'");
            config.set(s.substr(0, eq), s.substr(eq + 1));
          }
          if (mode) config.set("mode", *mode);
          if (target) config.target = *target;
          if (pivot) config.pivot = *pivot;
          if (langs) config.set("langs", *langs);
          if (out_dir) config.out_dir = *out_dir;
          if (seed) config.seed = *seed;
          if (max_vocab) config.max_vocab = *max_vocab;
          if (threads) config.threads = *threads;
          if (!train_dicts.empty()) config.train_dicts = to_paths(train_dicts);
          if (skip_mpsr) config.skip_mpsr = true;
          config.validate(true);
        },
        err);
    if (code != kExitOk) return code;
    try {
      cmd_train(config, out);
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: training failed: " << e.what() << '\n';
      return kExitRuntime;
    }
    return kExitOk;
  }
  if (evaluate->parsed()) {
    return guarded(
        [&] {
          resolve_langs(eval_config, eval_langs, eval_max_vocab, eval.langs, eval.max_vocab);
          eval.dicts = to_paths(eval_dicts);
          eval.similarities = to_paths(eval_sims);
          cmd_evaluate(eval, out);
        },
        err);
  }
  return guarded(
      [&] {
        resolve_langs(tr_config, tr_langs, tr_max_vocab, tr.langs, tr.max_vocab);
        cmd_translate(tr, in, out);
      },
      err);
}

}  // namespace mwe::cli
