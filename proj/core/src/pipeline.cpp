#include "mwe/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "mwe/errors.hpp"
#include "mwe/procrustes.hpp"

namespace mwe {

Mode parse_mode(const std::string& name) {
  if (name == "multilingual") return Mode::kMultilingual;
  if (name == "pivot") return Mode::kPivot;
  if (name == "direct") return Mode::kDirect;
  if (name == "supervised-procrustes") return Mode::kSupervisedProcrustes;
  throw ArgumentError("unknown mode '" + name + "' (multilingual, pivot, direct, supervised-procrustes)");
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kMultilingual: return "multilingual";
    case Mode::kPivot: return "pivot";
    case Mode::kDirect: return "direct";
    case Mode::kSupervisedProcrustes: return "supervised-procrustes";
  }
  return "unknown";
}

PipelineResult train_pipeline(const std::vector<EmbeddingSpace>& spaces, std::size_t target,
                              const PipelineConfig& config, const LogSink& mat_sink,
                              const RefineLogSink& mpsr_sink) {
  PipelineResult out;
  out.mat = train_mat(spaces, target, config.mat, mat_sink);
  out.mappings = out.mat.best;
  out.score = out.mat.best_score;
  if (!config.skip_mpsr) {
    out.mpsr = train_mpsr(spaces, out.mat.best, config.mpsr, mpsr_sink);
    out.mappings = out.mpsr->best;
    out.score = out.mpsr->best_score;
  }
  return out;
}

MappingSet supervised_procrustes(const std::vector<EmbeddingSpace>& spaces, std::size_t target,
                                 const DictionarySet& dicts) {
  if (target >= spaces.size()) throw ArgumentError("supervised_procrustes: target out of range");
  std::vector<std::string> langs;
  for (const auto& s : spaces) langs.push_back(s.lang());
  MappingSet m(std::move(langs), target, common_dim(spaces));
  for (std::size_t l = 0; l < spaces.size(); ++l) {
    if (l == target) continue;
    auto it = dicts.find({l, target});
    if (it == dicts.end()) {
      throw ArgumentError("supervised_procrustes: no training dictionary for " + spaces[l].lang() + "-" +
                          spaces[target].lang());
    }
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    for (const auto& [w, ts] : it->second.entries) {
      const auto a = spaces[l].vocab().find(w);
      if (!a) continue;
      for (const auto& t : ts) {
        if (auto b = spaces[target].vocab().find(t)) {
          rows.emplace_back(*a, *b);
          break;
        }
      }
    }
    if (rows.empty()) {
      throw ArgumentError("supervised_procrustes: no in-vocabulary pairs for " + spaces[l].lang() + "-" +
                          spaces[target].lang());
    }
    Matrix x(static_cast<Eigen::Index>(rows.size()), m.dim());
    Matrix y(static_cast<Eigen::Index>(rows.size()), m.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = spaces[l].matrix().row(static_cast<Eigen::Index>(rows[r].first));
      y.row(static_cast<Eigen::Index>(r)) = spaces[target].matrix().row(static_cast<Eigen::Index>(rows[r].second));
    }
    m.set_encoder(l, procrustes_solve(x, y));
  }
  return m;
}

std::size_t bwe_cost(Mode mode, std::size_t n) {
  if (n < 2) return 0;
  switch (mode) {
    case Mode::kMultilingual:
    case Mode::kSupervisedProcrustes: return n - 1;
    case Mode::kPivot: return 2 * (n - 1);
    case Mode::kDirect: return n * (n - 1);
  }
  return 0;
}

namespace {

struct PairJob {
  std::size_t src = 0;
  std::size_t tgt = 0;
  std::uint64_t seed = 0;
  Matrix map;
};

PipelineConfig bilingual_config(const PipelineConfig& base, std::uint64_t seed) {
  PipelineConfig c = base;
  c.mat.seed = seed;
  c.mpsr.seed = seed;
  // pair weights of a multilingual run do not apply to a two-language run
  c.mat.validation.weights.clear();
  c.mpsr.validation.weights.clear();
  return c;
}

void run_jobs(const std::vector<EmbeddingSpace>& spaces, const PipelineConfig& base, std::vector<PairJob>& jobs,
              std::size_t threads) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        PairJob& job = jobs[k];
        const std::vector<EmbeddingSpace> pair = {spaces[job.src], spaces[job.tgt]};
        const auto result = train_pipeline(pair, 1, bilingual_config(base, job.seed));
        job.map = result.mappings.encoder(0);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

BaselineResult run_baseline_comparison(const std::vector<EmbeddingSpace>& spaces, const BaselineOptions& options) {
  const std::size_t n = spaces.size();
  if (n < 2) throw ArgumentError("baseline comparison needs at least two languages");
  if (options.mode == Mode::kPivot && options.pivot >= n) throw ArgumentError("pivot language is not in the run");
  if (options.mode != Mode::kPivot && options.target >= n) throw ArgumentError("target language is not in the run");
  common_dim(spaces);

  BaselineResult out;
  out.mode = options.mode;
  for (const auto& s : spaces) out.langs.push_back(s.lang());
  out.cost.bwe_equivalents = bwe_cost(options.mode, n);
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t root = options.pipeline.mat.seed;

  switch (options.mode) {
    case Mode::kMultilingual: {
      auto result = train_pipeline(spaces, options.target, options.pipeline);
      out.maps = pair_mappings(result.mappings);
      out.joint = std::move(result.mappings);
      out.cost.training_runs = 1;
      break;
    }
    case Mode::kSupervisedProcrustes: {
      auto m = supervised_procrustes(spaces, options.target, options.train_dicts);
      out.maps = pair_mappings(m);
      out.joint = std::move(m);
      out.cost.training_runs = n - 1;
      break;
    }
    case Mode::kDirect: {
      std::vector<PairJob> jobs;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) jobs.push_back({i, j, root + jobs.size(), {}});
        }
      }
      run_jobs(spaces, options.pipeline, jobs, options.threads);
      for (auto& job : jobs) out.maps.push_back({job.src, job.tgt, std::move(job.map)});
      out.cost.training_runs = jobs.size();
      break;
    }
    case Mode::kPivot: {
      const std::size_t p = options.pivot;
      std::vector<PairJob> jobs;
      for (std::size_t l = 0; l < n; ++l) {
        if (l == p) continue;
        jobs.push_back({l, p, root + jobs.size(), {}});
        jobs.push_back({p, l, root + jobs.size(), {}});
      }
      run_jobs(spaces, options.pipeline, jobs, options.threads);
      std::vector<Matrix> to_pivot(n);
      std::vector<Matrix> from_pivot(n);
      for (auto& job : jobs) {
        if (job.tgt == p) {
          to_pivot[job.src] = std::move(job.map);
        } else {
          from_pivot[job.tgt] = std::move(job.map);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          Matrix m;
          if (i == p) {
            m = from_pivot[j];
          } else if (j == p) {
            m = to_pivot[i];
          } else {
            m = from_pivot[j] * to_pivot[i];
          }
          out.maps.push_back({i, j, std::move(m)});
        }
      }
      out.cost.training_runs = jobs.size();
      break;
    }
  }
  out.cost.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

MappingSet pair_mapping_set(const std::vector<EmbeddingSpace>& spaces, const PairMapping& map) {
  MappingSet m({spaces.at(map.src).lang(), spaces.at(map.tgt).lang()}, 1, static_cast<int>(map.map.rows()));
  m.set_encoder(0, map.map);
  return m;
}

}  // namespace mwe
