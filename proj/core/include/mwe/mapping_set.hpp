#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwe/tensor_core.hpp"

namespace mwe {

/// One d x d encoder per language into the shared space, which is the
/// target language's own space: the target's encoder is the identity and is
/// never trained. Decoders are transposes.
class MappingSet {
 public:
  MappingSet() = default;
  /// Identity encoders for every language.
  MappingSet(std::vector<std::string> langs, std::size_t target, int dim);

  std::size_t size() const noexcept { return langs_.size(); }
  int dim() const noexcept { return dim_; }
  std::size_t target() const noexcept { return target_; }
  const std::vector<std::string>& langs() const noexcept { return langs_; }
  const std::string& lang(std::size_t l) const { return langs_.at(l); }
  /// Throws ArgumentError for unknown codes.
  std::size_t index_of(const std::string& lang) const;

  const Matrix& encoder(std::size_t l) const { return maps_.at(l); }
  Matrix decoder(std::size_t l) const { return maps_.at(l).transpose(); }
  bool trainable(std::size_t l) const noexcept { return l != target_; }

  /// Replaces a non-target encoder. Throws ArgumentError for the target and
  /// ShapeError for a wrong shape.
  void set_encoder(std::size_t l, Matrix m);

  /// Largest |M^T M - I| entry over trainable encoders.
  double max_orthogonality_residual() const;

  /// Number of trainable encoders (N - 1).
  std::size_t trainable_count() const noexcept { return langs_.empty() ? 0 : langs_.size() - 1; }

  friend bool operator==(const MappingSet& a, const MappingSet& b);

 private:
  std::vector<std::string> langs_;
  std::size_t target_ = 0;
  int dim_ = 0;
  std::vector<Matrix> maps_;
};

/// SGD on every trainable encoder (gradient optionally projected onto the
/// tangent space of the orthogonal group), then one orthogonalization update
/// with `beta`. `grads` holds one d x d matrix per language.
void orthogonal_sgd_step(MappingSet& mappings, const std::vector<Matrix>& grads, double lr, double beta,
                         bool project);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  MappingSet mappings;
  std::uint64_t seed = 0;
};

/// Binary checkpoint: magic "MWEC", u32 version, u32 d, u32 N, u32 target,
/// u64 seed, N x (u32 length + language code bytes), then N row-major d x d
/// matrices of little-endian float32. All integers little-endian.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mwe
