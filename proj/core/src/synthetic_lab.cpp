#include "mwe/synthetic_lab.hpp"

#include <Eigen/LU>
#include <cmath>
#include <fstream>
#include <random>

#include "mwe/errors.hpp"

namespace mwe {

namespace {

// Independent generator per purpose so that, e.g., changing the noise level
// leaves the latent and the rotations untouched.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

enum Purpose : std::uint64_t { kLatent = 1, kRotation = 2, kNoise = 3, kCluster = 4 };

void normalize_in_place(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (n > 0) m.row(r) /= n;
  }
}

Matrix make_latent(const FamilySpec& spec) {
  auto rng = stream(spec.seed, kLatent);
  const auto v = static_cast<Eigen::Index>(spec.vocab);
  Matrix z(v, spec.dim);
  if (spec.latent == LatentShape::kIsotropic) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index r = 0; r < v; ++r) {
      for (Eigen::Index c = 0; c < spec.dim; ++c) z(r, c) = g(rng);
    }
  } else {
    std::exponential_distribution<double> e(1.0);
    for (Eigen::Index r = 0; r < v; ++r) {
      for (Eigen::Index c = 0; c < spec.dim; ++c) {
        z(r, c) = (e(rng) - 1.0) * std::exp(-static_cast<double>(c) / spec.skew_tau);
      }
    }
  }
  normalize_in_place(z);
  return z;
}

Matrix make_rotation(const FamilySpec& spec, std::size_t lang) {
  auto rng = stream(spec.seed, kRotation, lang);
  if (spec.rotation_spread < 0) return random_orthogonal(spec.dim, rng());
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(spec.dim, spec.dim);
  for (Eigen::Index r = 0; r < spec.dim; ++r) {
    for (Eigen::Index c = 0; c < spec.dim; ++c) a(r, c) = g(rng);
  }
  const double scale = spec.rotation_spread / std::sqrt(2.0 * spec.dim);
  const Matrix skew = scale * (a - a.transpose());
  const Matrix eye = Matrix::Identity(spec.dim, spec.dim);
  // Cayley transform: orthogonal with determinant +1 for any skew matrix
  return Eigen::PartialPivLU<Eigen::MatrixXd>(eye - skew).solve(Eigen::MatrixXd(eye + skew));
}

Matrix drift_toward_cluster(const Matrix& z, const FamilySpec& spec, std::size_t cluster) {
  const ClusterSpec& cs = spec.clusters[cluster];
  auto rng = stream(spec.seed, kCluster, cluster);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix out = z;
  const double c = std::cos(cs.angle);
  const double s = std::sin(cs.angle);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::RowVectorXd u(z.cols());
    for (Eigen::Index k = 0; k < z.cols(); ++k) u(k) = g(rng);
    u -= u.dot(z.row(r)) * z.row(r);
    const double n = u.norm();
    if (n > 0) u /= n;
    out.row(r) = c * z.row(r) + s * u;
  }
  return out;
}

}  // namespace

SyntheticFamily generate_family(const FamilySpec& spec) {
  if (spec.n_langs < 1) throw ArgumentError("generate_family: need at least one language");
  if (spec.dim < 1) throw ArgumentError("generate_family: dim must be positive");
  if (spec.vocab < static_cast<std::size_t>(spec.dim)) {
    throw ArgumentError("generate_family: vocab (" + std::to_string(spec.vocab) + ") must be at least dim (" +
                        std::to_string(spec.dim) + ")");
  }
  if (!(spec.sigma >= 0)) throw ArgumentError("generate_family: sigma must be non-negative");
  if (!spec.sigmas.empty() && spec.sigmas.size() != spec.n_langs) {
    throw ArgumentError("generate_family: one sigma per language required");
  }
  if (spec.latent == LatentShape::kSkewed && !(spec.skew_tau > 0)) {
    throw ArgumentError("generate_family: skew_tau must be positive");
  }
  if (!spec.langs.empty() && spec.langs.size() != spec.n_langs) {
    throw ArgumentError("generate_family: one language code per language required");
  }
  std::vector<int> cluster_of(spec.n_langs, -1);
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    for (auto m : spec.clusters[c].members) {
      if (m >= spec.n_langs) throw ArgumentError("generate_family: cluster member out of range");
      if (cluster_of[m] >= 0) throw ArgumentError("generate_family: a language may join one cluster only");
      cluster_of[m] = static_cast<int>(c);
    }
  }

  SyntheticFamily family;
  family.spec = spec;
  family.latent = make_latent(spec);
  std::vector<Matrix> drifted(spec.clusters.size());
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    if (spec.clusters[c].angle != 0.0) drifted[c] = drift_toward_cluster(family.latent, spec, c);
  }

  std::vector<std::string> words;
  words.reserve(spec.vocab);
  for (std::size_t r = 0; r < spec.vocab; ++r) words.push_back("w" + std::to_string(r));

  for (std::size_t l = 0; l < spec.n_langs; ++l) {
    const double sigma = spec.sigmas.empty() ? spec.sigma : spec.sigmas[l];
    if (!(sigma >= 0)) throw ArgumentError("generate_family: sigma must be non-negative");
    family.sigmas.push_back(sigma);
    family.rotations.push_back(make_rotation(spec, l));
    const int c = cluster_of[l];
    const Matrix& z = (c >= 0 && spec.clusters[static_cast<std::size_t>(c)].angle != 0.0)
                          ? drifted[static_cast<std::size_t>(c)]
                          : family.latent;
    Matrix e = z * family.rotations.back().transpose();
    if (sigma > 0) {
      auto rng = stream(spec.seed, kNoise, l);
      std::normal_distribution<double> g(0.0, sigma);
      for (Eigen::Index r = 0; r < e.rows(); ++r) {
        for (Eigen::Index k = 0; k < e.cols(); ++k) e(r, k) += g(rng);
      }
    }
    std::string code = spec.langs.empty() ? "l" + std::to_string(l) : spec.langs[l];
    family.spaces.emplace_back(std::move(code), Vocabulary(words), std::move(e));
  }
  return family;
}

MappingSet true_mappings(const SyntheticFamily& family, std::size_t target) {
  std::vector<std::string> langs;
  for (const auto& s : family.spaces) langs.push_back(s.lang());
  MappingSet m(std::move(langs), target, family.spec.dim);
  for (std::size_t l = 0; l < family.size(); ++l) {
    if (l == target) continue;
    m.set_encoder(l, family.rotations[target] * family.rotations[l].transpose());
  }
  return m;
}

EvalDictionary gold_dictionary(const SyntheticFamily& family, std::size_t src, std::size_t tgt) {
  EvalDictionary d;
  d.src_lang = family.spaces.at(src).lang();
  d.tgt_lang = family.spaces.at(tgt).lang();
  const auto& a = family.spaces[src].vocab();
  const auto& b = family.spaces[tgt].vocab();
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t r = 0; r < n; ++r) d.add(a.word(r), b.word(r));
  return d;
}

DictionarySet gold_dictionaries(const SyntheticFamily& family) {
  DictionarySet out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = 0; j < family.size(); ++j) {
      if (i != j) out.emplace(std::make_pair(i, j), gold_dictionary(family, i, j));
    }
  }
  return out;
}

PrecisionTable gold_precision(const SyntheticFamily& family, const std::vector<PairMapping>& maps,
                              const std::vector<std::size_t>& ks, std::size_t csls_n) {
  for (const auto& m : maps) {
    if (m.map.rows() != family.spec.dim || m.map.cols() != family.spec.dim) {
      throw ShapeError("gold_precision: mapping dimension does not match the family");
    }
  }
  return evaluate_pairs(family.spaces, maps, gold_dictionaries(family), ks, csls_n);
}

PrecisionTable gold_precision(const SyntheticFamily& family, const MappingSet& mappings,
                              const std::vector<std::size_t>& ks, std::size_t csls_n) {
  if (mappings.dim() != family.spec.dim) throw ShapeError("gold_precision: mapping dimension does not match the family");
  if (mappings.size() != family.size()) throw ArgumentError("gold_precision: mapping set has the wrong language count");
  return gold_precision(family, pair_mappings(mappings), ks, csls_n);
}

void export_family(const SyntheticFamily& family, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  const Matrix eye = Matrix::Identity(family.spec.dim, family.spec.dim);
  for (const auto& s : family.spaces) export_mapped_embeddings(s, eye, dir / (s.lang() + ".vec"));
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = 0; j < family.size(); ++j) {
      if (i == j) continue;
      const auto path = dir / (family.spaces[i].lang() + "-" + family.spaces[j].lang() + ".txt");
      std::ofstream out(path, std::ios::trunc);
      if (!out) throw IoError("cannot write '" + path.string() + "'");
      for (const auto& [w, ts] : gold_dictionary(family, i, j).entries) out << w << ' ' << ts.front() << '\n';
      if (!out) throw IoError("write failed for '" + path.string() + "'");
    }
  }
}

}  // namespace mwe
