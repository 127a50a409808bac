#include <mwe/errors.hpp>
#include <mwe/mapping_set.hpp>

#include "test_util.hpp"

using namespace mwe;

TEST(MappingSet, StartsAtIdentity) {
  MappingSet m({"en", "de", "fr"}, 1, 4);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.trainable_count(), 2u);
  EXPECT_FALSE(m.trainable(1));
  EXPECT_EQ(m.index_of("fr"), 2u);
  EXPECT_THROW(m.index_of("xx"), ArgumentError);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_TRUE(m.encoder(l).isIdentity(0.0));
  EXPECT_EQ(m.max_orthogonality_residual(), 0.0);
}

TEST(MappingSet, ConstructorErrors) {
  EXPECT_THROW(MappingSet({}, 0, 4), ArgumentError);
  EXPECT_THROW(MappingSet({"a"}, 1, 4), ArgumentError);
  EXPECT_THROW(MappingSet({"a", "a"}, 0, 4), ArgumentError);
  EXPECT_THROW(MappingSet({"a"}, 0, 0), ArgumentError);
}

TEST(MappingSet, TargetIsFrozen) {
  MappingSet m({"en", "de"}, 0, 3);
  EXPECT_THROW(m.set_encoder(0, random_orthogonal(3, 1)), ArgumentError);
  EXPECT_THROW(m.set_encoder(1, Matrix::Identity(2, 2)), ShapeError);
  m.set_encoder(1, random_orthogonal(3, 1));
  EXPECT_EQ(m.decoder(1), m.encoder(1).transpose());
}

TEST(OrthogonalSgdStep, LeavesTargetAndStaysNearOrthogonal) {
  std::mt19937_64 rng(1);
  MappingSet m({"a", "b", "c"}, 2, 5);
  m.set_encoder(0, random_orthogonal(5, 2));
  m.set_encoder(1, random_orthogonal(5, 3));
  std::vector<Matrix> grads(3);
  for (auto& g : grads) g = 0.01 * testutil::random_matrix(5, 5, rng);
  for (int t = 0; t < 100; ++t) orthogonal_sgd_step(m, grads, 0.1, 0.01, true);
  EXPECT_TRUE(m.encoder(2).isIdentity(0.0));
  EXPECT_LT(m.max_orthogonality_residual(), 0.01);
  grads.pop_back();
  EXPECT_THROW(orthogonal_sgd_step(m, grads, 0.1, 0.01, true), ShapeError);
}

TEST(Checkpoint, RoundTripAndLayout) {
  testutil::TempDir dir;
  MappingSet m({"en", "de", "fr"}, 0, 4);
  m.set_encoder(1, random_orthogonal(4, 7));
  m.set_encoder(2, random_orthogonal(4, 8));
  save_checkpoint({m, 42}, dir / "a.mwec");
  const auto c = load_checkpoint(dir / "a.mwec");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.mappings.langs(), m.langs());
  EXPECT_EQ(c.mappings.target(), 0u);
  for (std::size_t l = 0; l < 3; ++l)
    EXPECT_LT((c.mappings.encoder(l) - m.encoder(l)).cwiseAbs().maxCoeff(), 1e-6);

  const std::string bytes = testutil::read_file(dir / "a.mwec");
  EXPECT_EQ(bytes.substr(0, 4), "MWEC");
  const std::size_t header = 4 + 4 * 4 + 8 + 3 * 4 + 6;
  EXPECT_EQ(bytes.size(), header + 3 * 16 * 4);

  // saving the reloaded set reproduces the file exactly
  save_checkpoint(c, dir / "b.mwec");
  EXPECT_EQ(testutil::read_file(dir / "b.mwec"), bytes);
}

TEST(Checkpoint, Errors) {
  testutil::TempDir dir;
  EXPECT_THROW(load_checkpoint(dir / "missing.mwec"), IoError);
  testutil::write_file(dir / "bad.mwec", "NOPE0000000000000000");
  EXPECT_THROW(load_checkpoint(dir / "bad.mwec"), ParseError);
  MappingSet m({"en", "de"}, 0, 2);
  save_checkpoint({m, 1}, dir / "ok.mwec");
  std::string bytes = testutil::read_file(dir / "ok.mwec");
  testutil::write_file(dir / "trunc.mwec", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(dir / "trunc.mwec"), ParseError);
  bytes[4] = 9;
  testutil::write_file(dir / "ver.mwec", bytes);
  EXPECT_THROW(load_checkpoint(dir / "ver.mwec"), ParseError);
  EXPECT_THROW(save_checkpoint({m, 1}, dir / "no" / "dir" / "x.mwec"), IoError);
}
