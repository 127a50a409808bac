// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers to run a subset.

#include <mwe/csls.hpp>
#include <mwe/errors.hpp>
#include <mwe/eval_harness.hpp>
#include <mwe/mat_trainer.hpp>
#include <mwe/mlp.hpp>
#include <mwe/mpsr_refiner.hpp>
#include <mwe/pipeline.hpp>
#include <mwe/procrustes.hpp>
#include <mwe/synthetic_lab.hpp>
#include <mwe/validator.hpp>
#include <mwe_cli/commands.hpp>
#include <mwe_cli/run_config.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace mwe;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- fixtures

// Shared by criteria 1 and 2 (and 6, 8, 10): N=4, V=2000, d=32, sigma=0.01.
FamilySpec recovery_spec() {
  FamilySpec s;
  s.n_langs = 4;
  s.vocab = 2000;
  s.dim = 32;
  s.sigma = 0.01;
  s.seed = 7;
  s.latent = LatentShape::kSkewed;
  s.skew_tau = 16.0;
  s.rotation_spread = 0.65;
  return s;
}

constexpr std::uint64_t kTrainSeed = 1;

std::vector<std::string> training_settings() {
  return {"mat.k=3",           "mat.dis_hidden=128,128", "mat.map_lr=0.02",       "mat.dis_lr=0.1",
          "mat.epochs=5",      "mat.steps_per_epoch=500", "mat.log_every=100",    "mpsr.lr=2",
          "mpsr.epochs=5",     "mpsr.steps_per_epoch=1000"};
}

PipelineConfig pipeline_from(const cli::RunConfig& rc) {
  PipelineConfig pc{rc.mat, rc.mpsr, rc.skip_mpsr};
  pc.mat.seed = rc.seed;
  pc.mpsr.seed = rc.seed;
  return pc;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
  double seconds = 0.0;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mwe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in;
  std::ostringstream out, err;
  CliRun r;
  const auto start = Clock::now();
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.seconds = seconds_since(start);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// The exported recovery family, the CLI runs on it and an in-process
// library run with the manifest's configuration. Built on first use.
struct RecoveryRun {
  testutil::TempDir dir;
  SyntheticFamily family;  // spaces replaced by what the CLI loads from disk
  CliRun full;
  CliRun skip;
  std::optional<Checkpoint> full_ckpt;
  std::optional<Checkpoint> skip_ckpt;
  std::optional<PipelineResult> library;
  std::string error;

  RecoveryRun() {
    try {
      family = generate_family(recovery_spec());
      export_family(family, dir.path());
      std::string langs;
      for (std::size_t l = 0; l < family.size(); ++l) {
        const auto& code = family.spaces[l].lang();
        if (l) langs += ",";
        langs += code + "=" + (dir / (code + ".vec")).string();
        family.spaces[l] = load_text_embeddings(dir / (code + ".vec"), kDefaultMaxVocab, code);
      }
      auto args_for = [&](const std::string& out) {
        std::vector<std::string> a = {"train", "--mode", "multilingual", "--langs", langs, "--target", "l0",
                                      "--seed", std::to_string(kTrainSeed), "--out", (dir / out).string()};
        for (const auto& s : training_settings()) {
          a.push_back("--set");
          a.push_back(s);
        }
        return a;
      };

      full = run_cli(args_for("full"));
      if (full.code != 0) throw Error("train exited " + std::to_string(full.code) + ": " + full.err);
      full_ckpt = load_checkpoint(dir / "full" / "checkpoint.mwec");

      auto skip_args = args_for("skip");
      skip_args.push_back("--skip-mpsr");
      skip = run_cli(skip_args);
      if (skip.code != 0) throw Error("train --skip-mpsr exited " + std::to_string(skip.code) + ": " + skip.err);
      skip_ckpt = load_checkpoint(dir / "skip" / "checkpoint.mwec");

      cli::RunConfig rc;
      cli::read_config_file(dir / "full" / "manifest.txt", rc);
      library = train_pipeline(family.spaces, 0, pipeline_from(rc));
      save_checkpoint({library->mappings, rc.seed}, dir / "library.mwec");
    } catch (const std::exception& e) {
      error = e.what();
    }
  }

  bool ok() const { return error.empty(); }
};

RecoveryRun& recovery() {
  static std::unique_ptr<RecoveryRun> run;
  if (!run) run = std::make_unique<RecoveryRun>();
  return *run;
}

double min_pair_precision(const PrecisionTable& t) {
  double m = 1.0;
  for (const auto& p : t.pairs) m = std::min(m, p.result.at(1));
  return m;
}

// ---------------------------------------------------------------- criteria

Outcome synthetic_recovery() {
  auto& r = recovery();
  if (!r.ok()) return {false, r.error};
  const auto table = gold_precision(r.family, r.full_ckpt->mappings);
  const double worst = min_pair_precision(table);
  const bool pass = table.pairs.size() == 12 && worst >= 0.95 && r.full.seconds <= 900.0;
  return {pass, "min p@1 " + fmt(worst) + " over " + std::to_string(table.pairs.size()) + " pairs, overall " +
                    fmt(table.overall()) + ", train " + fmt(r.full.seconds, 3) + " s (limit 900)"};
}

Outcome ablation_direction() {
  auto& r = recovery();
  if (!r.ok()) return {false, r.error};
  const double full = gold_precision(r.family, r.full_ckpt->mappings).overall();
  const double mat_only = gold_precision(r.family, r.skip_ckpt->mappings).overall();
  const double gap = 100.0 * (full - mat_only);
  return {gap >= 2.0, "MAT+MPSR " + fmt(100 * full) + "%, MAT only " + fmt(100 * mat_only) + "%, gap " +
                          fmt(gap, 3) + " points (need >= 2)"};
}

Outcome multilingual_vs_pivot() {
  int satisfied = 0;
  std::string detail;
  for (std::uint64_t seed : {11, 12, 13}) {
    FamilySpec spec;
    spec.n_langs = 4;
    spec.vocab = 2000;
    spec.dim = 32;
    spec.sigma = 0.02;
    spec.seed = seed;
    spec.latent = LatentShape::kSkewed;
    spec.skew_tau = 16.0;
    spec.rotation_spread = 0.65;
    spec.clusters = {{{1, 2, 3}, 0.3}};
    const auto family = generate_family(spec);

    cli::RunConfig rc;
    for (const auto& s : training_settings()) {
      const auto eq = s.find('=');
      rc.set(s.substr(0, eq), s.substr(eq + 1));
    }
    rc.seed = kTrainSeed;
    BaselineOptions opts;
    opts.pipeline = pipeline_from(rc);
    opts.target = 0;
    opts.pivot = 0;
    auto intra = [](std::size_t s, std::size_t t) { return s > 0 && t > 0; };

    opts.mode = Mode::kMultilingual;
    const auto multi = gold_precision(family, run_baseline_comparison(family.spaces, opts).maps);
    opts.mode = Mode::kPivot;
    const auto pivot = gold_precision(family, run_baseline_comparison(family.spaces, opts).maps);

    const double mo = 100 * multi.overall(), po = 100 * pivot.overall();
    const double mi = 100 * multi.mean_if(intra), pi = 100 * pivot.mean_if(intra);
    const bool ok = mo >= po - 0.5 && mi >= pi;
    satisfied += ok;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + " mean " + fmt(mo) +
              " vs " + fmt(po) + ", intra " + fmt(mi) + " vs " + fmt(pi) + (ok ? " ok" : " no");
  }
  return {satisfied >= 2, std::to_string(satisfied) + "/3 seeds satisfied (" + detail + ")"};
}

Outcome procrustes_exactness() {
  const auto start = Clock::now();
  FamilySpec spec;
  spec.n_langs = 2;
  spec.vocab = 500;
  spec.dim = 16;
  spec.sigma = 0.0;
  spec.seed = 3;
  spec.rotation_spread = -1.0;
  const auto f = generate_family(spec);
  const Matrix w = procrustes_solve(f.spaces[1].matrix(), f.spaces[0].matrix());
  const auto truth = true_mappings(f, 0);
  const double err = (w - truth.encoder(1)).cwiseAbs().maxCoeff();
  MappingSet m(truth.langs(), 0, 16);
  m.set_encoder(1, w);
  const auto table = gold_precision(f, m);
  const double elapsed = seconds_since(start);
  const bool pass = err < 1e-8 && min_pair_precision(table) == 1.0 && elapsed < 5.0;
  return {pass, "max-abs error " + fmt(err, 3) + ", p@1 " + fmt(min_pair_precision(table)) + ", " +
                    fmt(elapsed, 3) + " s"};
}

Outcome gradient_correctness() {
  constexpr int kTrials = 20;
  constexpr double kTol = 1e-4;
  std::map<std::string, double> worst;
  auto record = [&](const std::string& name, double e) { worst[name] = std::max(worst[name], e); };
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 2.0);

  for (int t = 0; t < kTrials; ++t) {
    const double y = u(rng), z = g(rng);
    auto f = [&](const std::vector<double>& v) { return cross_entropy(y, sigmoid(v[0])).loss; };
    record("cross_entropy", oracle::relative_error(cross_entropy(y, sigmoid(z)).dlogit,
                                                   oracle::central_difference(f, {z}, 0)));
  }

  for (int t = 0; t < kTrials; ++t) {
    const Matrix a = testutil::random_matrix(3, 5, rng), b = testutil::random_matrix(3, 5, rng);
    const auto m = mse_loss(a, b);
    std::vector<double> ga, gb, fa, fb;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      fa.push_back(oracle::central_difference(
          [&](const std::vector<double>& v) {
            Matrix x = a;
            x.data()[i] = v[0];
            return mse_loss(x, b).loss;
          },
          {a.data()[i]}, 0));
      fb.push_back(oracle::central_difference(
          [&](const std::vector<double>& v) {
            Matrix x = b;
            x.data()[i] = v[0];
            return mse_loss(a, x).loss;
          },
          {b.data()[i]}, 0));
      ga.push_back(m.grad_a.data()[i]);
      gb.push_back(m.grad_b.data()[i]);
    }
    record("mse_loss", std::max(oracle::relative_error(ga, fa), oracle::relative_error(gb, fb)));
  }

  const Activation acts[] = {Activation::kLeakyRelu, Activation::kRelu, Activation::kTanh};
  for (int t = 0; t < kTrials; ++t) {
    MlpSpec spec;
    spec.input_dim = 4;
    spec.hidden = {6, 3};
    spec.activation = acts[t % 3];
    spec.input_dropout = 0.0;
    const auto p = make_mlp(spec, rng);
    const Matrix x = testutil::random_matrix(5, 4, rng);
    Vector y(5);
    for (Eigen::Index r = 0; r < 5; ++r) y(r) = u(rng);
    auto loss = [&](const MlpParams& q, const Matrix& in) {
      const auto c = mlp_forward(q, in, false);
      double s = 0.0;
      for (Eigen::Index r = 0; r < in.rows(); ++r) s += cross_entropy(y(r), c.probs(r)).loss / in.rows();
      return s;
    };
    const auto cache = mlp_forward(p, x, false);
    Vector up(5);
    for (Eigen::Index r = 0; r < 5; ++r) up(r) = cross_entropy(y(r), cache.probs(r)).dlogit / 5.0;
    const auto grads = mlp_backward(p, cache, up);

    std::vector<double> analytic, numeric;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      for (Eigen::Index i = 0; i < p.layers[l].weight.size(); ++i) {
        numeric.push_back(oracle::central_difference(
            [&](const std::vector<double>& v) {
              auto q = p;
              q.layers[l].weight.data()[i] = v[0];
              return loss(q, x);
            },
            {p.layers[l].weight.data()[i]}, 0));
        analytic.push_back(grads.layers[l].weight.data()[i]);
      }
      for (Eigen::Index i = 0; i < p.layers[l].bias.size(); ++i) {
        numeric.push_back(oracle::central_difference(
            [&](const std::vector<double>& v) {
              auto q = p;
              q.layers[l].bias(i) = v[0];
              return loss(q, x);
            },
            {p.layers[l].bias(i)}, 0));
        analytic.push_back(grads.layers[l].bias(i));
      }
    }
    record("mlp_backward params", oracle::relative_error(analytic, numeric));
    analytic.clear();
    numeric.clear();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      numeric.push_back(oracle::central_difference(
          [&](const std::vector<double>& v) {
            Matrix in = x;
            in.data()[i] = v[0];
            return loss(p, in);
          },
          {x.data()[i]}, 0));
      analytic.push_back(grads.input.data()[i]);
    }
    record("mlp_backward input", oracle::relative_error(analytic, numeric));
  }

  FamilySpec fs;
  fs.n_langs = 3;
  fs.vocab = 100;
  fs.dim = 5;
  fs.seed = 8;
  const auto family = generate_family(fs);
  for (int t = 0; t < kTrials; ++t) {
    MatConfig cfg;
    cfg.batch_size = 6;
    cfg.dis_hidden = {7, 4};
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.validation.top_k = 100;
    MatTrainer trainer(family.spaces, 0, cfg);
    trainer.mappings().set_encoder(1, random_orthogonal(5, 200 + t));
    trainer.mappings().set_encoder(2, random_orthogonal(5, 300 + t));
    const std::size_t i = 1 + t % 2, j = t % 3;
    const Matrix xi = testutil::random_matrix(6, 5, rng);
    auto grads = trainer.zero_gradients();
    trainer.accumulate_mapping_gradient(i, j, xi, grads);
    std::vector<double> analytic, numeric;
    for (std::size_t l : {std::size_t{1}, std::size_t{2}}) {
      const Matrix m0 = trainer.mappings().encoder(l);
      for (Eigen::Index e = 0; e < m0.size(); ++e) {
        numeric.push_back(oracle::central_difference(
            [&](const std::vector<double>& v) {
              Matrix m = m0;
              m.data()[e] = v[0];
              trainer.mappings().set_encoder(l, m);
              const double out = trainer.mapping_loss(i, j, xi);
              trainer.mappings().set_encoder(l, m0);
              return out;
            },
            {m0.data()[e]}, 0));
        analytic.push_back(grads[l].data()[e]);
      }
    }
    record("mapping (adversarial)", oracle::relative_error(analytic, numeric));
  }

  for (int t = 0; t < kTrials; ++t) {
    MappingSet m({"l0", "l1", "l2"}, 0, 5);
    m.set_encoder(1, random_orthogonal(5, 400 + t));
    m.set_encoder(2, random_orthogonal(5, 500 + t));
    Lexicon lex;
    lex.src = 1 + t % 2;
    lex.tgt = (t % 3 == static_cast<int>(lex.src)) ? 0 : t % 3;
    for (std::size_t w = 0; w < 12; ++w) lex.pairs.emplace_back(w, (w * 5 + 3) % 100);
    const auto batch = sample_lexicon_batch(lex, 8, rng);
    std::vector<Matrix> grads(3, Matrix::Zero(5, 5));
    accumulate_refinement_gradient(family.spaces, m, lex, batch, grads);
    std::vector<double> analytic, numeric;
    for (std::size_t l : {lex.src, lex.tgt}) {
      if (!m.trainable(l)) continue;
      const Matrix m0 = m.encoder(l);
      for (Eigen::Index e = 0; e < m0.size(); ++e) {
        numeric.push_back(oracle::central_difference(
            [&](const std::vector<double>& v) {
              Matrix x = m0;
              x.data()[e] = v[0];
              m.set_encoder(l, x);
              const double out = refinement_loss(family.spaces, m, lex, batch);
              m.set_encoder(l, m0);
              return out;
            },
            {m0.data()[e]}, 0));
        analytic.push_back(grads[l].data()[e]);
      }
    }
    record("mapping (refinement)", oracle::relative_error(analytic, numeric));
  }

  bool pass = true;
  std::string detail;
  for (const auto& [name, e] : worst) {
    pass = pass && e < kTol;
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt(e, 2);
  }
  return {pass, "worst relative error over " + std::to_string(kTrials) + " trials: " + detail};
}

Outcome orthogonality_invariant() {
  double fixed_point = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Matrix q = random_orthogonal(2 + t % 40, 900 + t);
    fixed_point = std::max(fixed_point, (orthogonalize_update(q, 0.001) - q).cwiseAbs().maxCoeff());
  }
  auto& r = recovery();
  if (!r.ok()) return {false, r.error};
  double run_max = r.library->mat.max_orthogonality_residual;
  if (r.library->mpsr) run_max = std::max(run_max, r.library->mpsr->max_orthogonality_residual);
  const bool pass = run_max <= 0.01 && fixed_point < 1e-12;
  return {pass, "max ||M^T M - I||_max over training " + fmt(run_max, 3) + ", fixed-point residual " +
                    fmt(fixed_point, 3)};
}

Outcome oracle_equivalence() {
  constexpr int kTrials = 50;
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> size(2, 60);
  std::map<std::string, int> failures;
  double worst_score = 0.0;

  for (int t = 0; t < kTrials; ++t) {
    const int q = size(rng), m = size(rng), d = 1 + size(rng) % 9;
    const std::size_t n = 1 + static_cast<std::size_t>(size(rng)) % std::min(q, m);
    const auto xr = oracle::random_rows(q, d, rng), yr = oracle::random_rows(m, d, rng);
    const auto expected = oracle::csls(xr, yr, n);
    const Matrix got = csls_scores(testutil::to_matrix(xr), testutil::to_matrix(yr), n);
    double w = 0.0;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < m; ++j) w = std::max(w, std::abs(got(i, j) - expected[i][j]));
    worst_score = std::max(worst_score, w);
    failures["csls_scores"] += w >= 1e-10;
  }

  for (int t = 0; t < kTrials; ++t) {
    const int q = size(rng), m = size(rng), d = 2 + size(rng) % 7;
    const std::size_t n = 1 + static_cast<std::size_t>(size(rng)) % std::min(q, m);
    const std::size_t k = 1 + static_cast<std::size_t>(size(rng)) % m;
    const auto xr = oracle::random_rows(q, d, rng), yr = oracle::random_rows(m, d, rng);
    const auto c = oracle::csls(xr, yr, n);
    const auto got = csls_topk(testutil::to_matrix(xr), testutil::to_matrix(yr), n, k);
    bool ok = got.size() == static_cast<std::size_t>(q);
    for (int i = 0; ok && i < q; ++i) {
      ok = got[i].indices == oracle::ranked(c[i], k);
      for (std::size_t r = 0; ok && r < k; ++r) {
        const double diff = std::abs(got[i].scores[r] - c[i][got[i].indices[r]]);
        worst_score = std::max(worst_score, diff);
        ok = diff < 1e-10;
      }
    }
    failures["csls_topk"] += !ok;
  }

  for (int t = 0; t < kTrials; ++t) {
    const int a = size(rng), b = size(rng), d = 2 + size(rng) % 6;
    const std::size_t cutoff = 1 + static_cast<std::size_t>(size(rng));
    const std::size_t n = 1 + static_cast<std::size_t>(size(rng)) % 10;
    const auto src = testutil::make_space("a", testutil::random_matrix(a, d, rng));
    const auto tgt = testutil::make_space("b", testutil::random_matrix(b, d, rng));
    const Matrix ms = random_orthogonal(d, 1000 + t), mt = random_orthogonal(d, 2000 + t);
    const auto lex = induce_lexicon(src, tgt, ms, mt, cutoff, n);
    const auto xs = oracle::apply(testutil::to_rows(frequent_slice(src, cutoff)), testutil::to_rows(ms));
    const auto xt = oracle::apply(testutil::to_rows(frequent_slice(tgt, cutoff)), testutil::to_rows(mt));
    failures["induce_lexicon"] += lex.pairs != oracle::mutual_nn(xs, xt, std::min({n, xs.size(), xt.size()}));
  }

  for (int t = 0; t < kTrials; ++t) {
    const int a = size(rng), b = size(rng), d = 2 + size(rng) % 6;
    const std::size_t n = 1 + static_cast<std::size_t>(size(rng)) % 10;
    const auto src = testutil::make_space("a", testutil::random_matrix(a, d, rng), "s");
    const auto tgt = testutil::make_space("b", testutil::random_matrix(b, d, rng), "t");
    const Matrix ms = random_orthogonal(d, 3000 + t), mt = random_orthogonal(d, 4000 + t);
    EvalDictionary dict;
    std::uniform_int_distribution<int> word(0, std::max(a, b) + 5);
    std::vector<std::size_t> rows;
    std::vector<std::set<std::size_t>> gold;
    std::map<std::string, std::size_t> pos;
    const int entries = 1 + size(rng) % 30;
    for (int e = 0; e < entries; ++e) {
      const int sw = word(rng), tw = word(rng);
      const std::string sname = "s" + std::to_string(sw), tname = "t" + std::to_string(tw);
      dict.add(sname, tname);
      if (sw >= a) continue;
      auto it = pos.find(sname);
      if (it == pos.end()) {
        it = pos.emplace(sname, rows.size()).first;
        rows.push_back(static_cast<std::size_t>(sw));
        gold.emplace_back();
      }
      if (tw < b) gold[it->second].insert(static_cast<std::size_t>(tw));
    }
    const std::vector<std::size_t> ks = {1, 5};
    const auto expected = oracle::precision_hits(oracle::apply(testutil::to_rows(src.matrix()), testutil::to_rows(ms)),
                                                 oracle::apply(testutil::to_rows(tgt.matrix()), testutil::to_rows(mt)),
                                                 rows, gold, ks, n);
    const bool evaluable = std::any_of(gold.begin(), gold.end(), [](const auto& g) { return !g.empty(); });
    bool ok = false;
    try {
      const auto got = word_translation_precision(dict, src, tgt, ms, mt, ks, n);
      ok = evaluable && got.hits == expected;
    } catch (const EvalError&) {
      ok = !evaluable;
    }
    failures["word_translation_precision"] += !ok;
  }

  for (int t = 0; t < kTrials; ++t) {
    const int a = size(rng), b = size(rng), d = 2 + size(rng) % 6;
    const std::size_t top_k = 1 + static_cast<std::size_t>(size(rng));
    const std::size_t n = 1 + static_cast<std::size_t>(size(rng)) % 10;
    const auto src = testutil::make_space("a", testutil::random_matrix(a, d, rng));
    const auto tgt = testutil::make_space("b", testutil::random_matrix(b, d, rng));
    const Matrix ms = random_orthogonal(d, 5000 + t), mt = random_orthogonal(d, 6000 + t);
    const double got = mean_csls(src, tgt, ms, mt, top_k, n);
    const auto composed = oracle::multiply(oracle::transpose(testutil::to_rows(mt)), testutil::to_rows(ms));
    const auto qr = oracle::apply(testutil::to_rows(frequent_slice(src, top_k)), composed);
    const auto kr = testutil::to_rows(frequent_slice(tgt, top_k));
    const double diff = std::abs(got - oracle::mean_csls(qr, kr, std::min({n, qr.size(), kr.size()})));
    worst_score = std::max(worst_score, diff);
    failures["mean_csls"] += diff >= 1e-10;
  }

  int total = 0;
  std::string detail;
  for (const auto& [name, count] : failures) {
    total += count;
    detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(kTrials - count) + "/" +
              std::to_string(kTrials);
  }
  return {total == 0, detail + "; worst score difference " + fmt(worst_score, 2)};
}

Outcome validation_usefulness() {
  auto& r = recovery();
  if (!r.ok()) return {false, r.error};
  std::vector<double> v, p;
  for (const auto& h : r.library->mat.history) {
    v.push_back(h.val_score);
    p.push_back(gold_precision(r.family, h.mappings).overall());
  }
  if (r.library->mpsr) {
    for (const auto& h : r.library->mpsr->history) {
      if (h.epoch == 0) continue;  // same mappings as the MAT best
      v.push_back(h.val_score);
      p.push_back(gold_precision(r.family, h.mappings).overall());
    }
  }
  if (v.size() < 8) return {false, "only " + std::to_string(v.size()) + " checkpoints"};
  const double rho = spearman_rho(v, p);
  return {rho >= 0.7, "Spearman(V, mean p@1) " + fmt(rho) + " over " + std::to_string(v.size()) + " checkpoints"};
}

Outcome csls_hand_values() {
  Matrix x(1, 2), y(2, 2);
  x << 1, 0;
  y << 1, 0, 0, 1;
  const Matrix s = csls_scores(x, y, 1);
  const Matrix same = Matrix::Constant(5, 3, -0.4);
  const double zeros = csls_scores(same, same, 2).cwiseAbs().maxCoeff();
  const bool pass = s(0, 0) == 0.0 && s(0, 1) == -1.0 && zeros == 0.0;
  return {pass, "CSLS " + fmt(s(0, 0)) + " and " + fmt(s(0, 1)) + ", identical-vector max |CSLS| " + fmt(zeros)};
}

double seconds_per_step(std::size_t n_langs) {
  auto spec = recovery_spec();
  spec.n_langs = n_langs;
  const auto family = generate_family(spec);
  MatConfig cfg;
  cfg.k = 3;
  cfg.dis_hidden = {128, 128};
  cfg.seed = 3;
  MatTrainer trainer(family.spaces, 0, cfg);
  for (int s = 0; s < 20; ++s) trainer.train_step();
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = Clock::now();
    for (int s = 0; s < 100; ++s) trainer.train_step();
    best = std::min(best, seconds_since(start) / 100.0);
  }
  return best;
}

Outcome determinism_and_scaling() {
  auto& r = recovery();
  if (!r.ok()) return {false, r.error};
  const bool same = testutil::read_file(r.dir / "full" / "checkpoint.mwec") == testutil::read_file(r.dir / "library.mwec");
  const double t2 = seconds_per_step(2), t4 = seconds_per_step(4);
  const double ratio = t4 / t2;
  return {same && ratio <= 2.5, std::string("repeat run checkpoint ") + (same ? "bit-identical" : "differs") +
                                    "; step time N=2 " + fmt(1e3 * t2, 3) + " ms, N=4 " + fmt(1e3 * t4, 3) +
                                    " ms, ratio " + fmt(ratio, 3) + " (limit 2.5)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "synthetic multilingual recovery", synthetic_recovery},
      {2, "refinement ablation direction", ablation_direction},
      {3, "multilingual vs pivot on clustered languages", multilingual_vs_pivot},
      {4, "procrustes oracle exactness", procrustes_exactness},
      {5, "gradient correctness", gradient_correctness},
      {6, "orthogonality invariant", orthogonality_invariant},
      {7, "oracle equivalence suite", oracle_equivalence},
      {8, "validation criterion usefulness", validation_usefulness},
      {9, "CSLS hand-worked values", csls_hand_values},
      {10, "determinism and cost scaling", determinism_and_scaling},
  };
  std::set<int> wanted;
  for (int a = 1; a < argc; ++a) {
    try {
      wanted.insert(std::stoi(argv[a]));
    } catch (const std::exception&) {
      std::cerr << "usage: " << argv[0] << " [criterion number...]\n";
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << " [" << fmt(seconds_since(start), 3) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
