#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwe/embedding_store.hpp"
#include "mwe/eval_harness.hpp"
#include "mwe/mapping_set.hpp"

namespace mwe {

enum class LatentShape {
  kIsotropic,  ///< standard Gaussian rows
  kSkewed,     ///< centred exponential coordinates scaled by exp(-c / tau)
};

/// Languages in `members` see every latent row turned by `angle` radians
/// toward a per-word direction shared by the whole cluster.
struct ClusterSpec {
  std::vector<std::size_t> members;
  double angle = 0.0;
};

struct FamilySpec {
  std::size_t n_langs = 4;
  std::size_t vocab = 2000;
  int dim = 32;
  double sigma = 0.01;
  std::vector<double> sigmas;  ///< per-language override; empty means `sigma` everywhere
  std::uint64_t seed = 0;
  LatentShape latent = LatentShape::kIsotropic;
  double skew_tau = 16.0;
  /// Negative: Haar-random rotations from random_orthogonal. Otherwise
  /// R = Cayley(A) for a random skew-symmetric A with entries of scale
  /// spread / sqrt(dim).
  double rotation_spread = -1.0;
  std::vector<ClusterSpec> clusters;
  std::vector<std::string> langs;  ///< default "l0", "l1", ...
};

struct SyntheticFamily {
  FamilySpec spec;
  Matrix latent;                    ///< unit rows
  std::vector<Matrix> rotations;    ///< R_l
  std::vector<double> sigmas;
  std::vector<EmbeddingSpace> spaces;  ///< rows latent_l R_l^T + sigma_l noise, words "w0".."w{V-1}"

  std::size_t size() const noexcept { return spaces.size(); }
};

/// Throws ArgumentError for vocab < dim, fewer than one language, negative
/// noise or a bad cluster member.
SyntheticFamily generate_family(const FamilySpec& spec);

/// Encoders R_t R_l^T, i.e. the ground-truth maps into language `target`.
MappingSet true_mappings(const SyntheticFamily& family, std::size_t target);

/// Rank-identity dictionary between two languages of the family.
EvalDictionary gold_dictionary(const SyntheticFamily& family, std::size_t src, std::size_t tgt);

/// Gold dictionaries for every ordered pair.
DictionarySet gold_dictionaries(const SyntheticFamily& family);

/// Precision of `mappings` against the gold dictionaries on every ordered
/// pair. Throws ShapeError on a dimension mismatch.
PrecisionTable gold_precision(const SyntheticFamily& family, const MappingSet& mappings,
                              const std::vector<std::size_t>& ks = {1}, std::size_t csls_n = 10);
PrecisionTable gold_precision(const SyntheticFamily& family, const std::vector<PairMapping>& maps,
                              const std::vector<std::size_t>& ks = {1}, std::size_t csls_n = 10);

/// Writes <lang>.vec for every language and <src>-<tgt>.txt gold
/// dictionaries for every ordered pair into `dir`.
void export_family(const SyntheticFamily& family, const std::filesystem::path& dir);

}  // namespace mwe
