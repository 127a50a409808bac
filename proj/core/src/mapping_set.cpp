#include "mwe/mapping_set.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "mwe/errors.hpp"

namespace mwe {

MappingSet::MappingSet(std::vector<std::string> langs, std::size_t target, int dim)
    : langs_(std::move(langs)), target_(target), dim_(dim) {
  if (langs_.empty()) throw ArgumentError("mapping set needs at least one language");
  if (target_ >= langs_.size()) throw ArgumentError("target language index out of range");
  if (dim_ < 1) throw ArgumentError("mapping dimension must be positive");
  for (std::size_t i = 0; i < langs_.size(); ++i) {
    for (std::size_t j = i + 1; j < langs_.size(); ++j) {
      if (langs_[i] == langs_[j]) throw ArgumentError("duplicate language code '" + langs_[i] + "'");
    }
  }
  maps_.assign(langs_.size(), Matrix::Identity(dim_, dim_));
}

std::size_t MappingSet::index_of(const std::string& lang) const {
  auto it = std::find(langs_.begin(), langs_.end(), lang);
  if (it == langs_.end()) throw ArgumentError("unknown language '" + lang + "'");
  return static_cast<std::size_t>(it - langs_.begin());
}

void MappingSet::set_encoder(std::size_t l, Matrix m) {
  if (l >= maps_.size()) throw ArgumentError("language index out of range");
  if (l == target_) throw ArgumentError("the target language encoder is fixed to the identity");
  if (m.rows() != dim_ || m.cols() != dim_) throw ShapeError("encoder must be d x d");
  maps_[l] = std::move(m);
}

double MappingSet::max_orthogonality_residual() const {
  double worst = 0.0;
  for (std::size_t l = 0; l < maps_.size(); ++l) {
    if (trainable(l)) worst = std::max(worst, orthogonality_residual(maps_[l]));
  }
  return worst;
}

bool operator==(const MappingSet& a, const MappingSet& b) {
  return a.langs_ == b.langs_ && a.target_ == b.target_ && a.dim_ == b.dim_ && a.maps_ == b.maps_;
}

void orthogonal_sgd_step(MappingSet& mappings, const std::vector<Matrix>& grads, double lr, double beta,
                         bool project) {
  if (grads.size() != mappings.size()) throw ShapeError("one gradient per language required");
  for (std::size_t l = 0; l < mappings.size(); ++l) {
    if (!mappings.trainable(l)) continue;
    Matrix m = mappings.encoder(l);
    if (project) {
      sgd_step(m, tangent_project(m, grads[l]), lr);
    } else {
      sgd_step(m, grads[l], lr);
    }
    mappings.set_encoder(l, orthogonalize_update(m, beta));
  }
}

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'W', 'E', 'C'};

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T> || std::is_same_v<T, float>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& name) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw ParseError(name, 0, "truncated checkpoint");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const MappingSet& m = checkpoint.mappings;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.target()));
  write_le<std::uint64_t>(out, checkpoint.seed);
  for (const auto& lang : m.langs()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(lang.size()));
    out.write(lang.data(), static_cast<std::streamsize>(lang.size()));
  }
  for (std::size_t l = 0; l < m.size(); ++l) {
    const Matrix& enc = m.encoder(l);
    for (Eigen::Index r = 0; r < enc.rows(); ++r) {
      for (Eigen::Index c = 0; c < enc.cols(); ++c) write_le<float>(out, static_cast<float>(enc(r, c)));
    }
  }
  out.flush();
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + name);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError(name, 0, "not a mapping checkpoint (bad magic)");
  }
  const auto version = read_le<std::uint32_t>(in, name);
  if (version != kCheckpointVersion) {
    throw ParseError(name, 0, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto dim = read_le<std::uint32_t>(in, name);
  const auto count = read_le<std::uint32_t>(in, name);
  const auto target = read_le<std::uint32_t>(in, name);
  Checkpoint ckpt;
  ckpt.seed = read_le<std::uint64_t>(in, name);
  if (dim == 0 || count == 0 || target >= count || dim > 65536 || count > 4096) {
    throw ParseError(name, 0, "corrupt checkpoint header");
  }
  std::vector<std::string> langs;
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto len = read_le<std::uint32_t>(in, name);
    if (len > 256) throw ParseError(name, 0, "corrupt language code");
    std::string code(len, '\0');
    if (!in.read(code.data(), len)) throw ParseError(name, 0, "truncated checkpoint");
    langs.push_back(std::move(code));
  }
  MappingSet set(std::move(langs), target, static_cast<int>(dim));
  for (std::uint32_t l = 0; l < count; ++l) {
    Matrix enc(dim, dim);
    for (Eigen::Index r = 0; r < enc.rows(); ++r) {
      for (Eigen::Index c = 0; c < enc.cols(); ++c) enc(r, c) = read_le<float>(in, name);
    }
    if (l == target) {
      if (!enc.isIdentity(0.0)) throw ParseError(name, 0, "target encoder is not the identity");
    } else {
      set.set_encoder(l, std::move(enc));
    }
  }
  ckpt.mappings = std::move(set);
  return ckpt;
}

}  // namespace mwe
