#include <doctest.h>

#include <cstring>
#include <set>

#include "fmapdiag/dataio.hpp"
#include "fmapdiag/error.hpp"
#include "test_util.hpp"

using namespace fmapdiag;

namespace {

std::string binary_header(std::uint32_t n, std::uint32_t d) {
  std::string s = "EMB1";
  for (auto v : {n, d}) {
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  return s;
}

std::string f32_payload(std::size_t count, float value) {
  std::string s;
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  for (std::size_t i = 0; i < count; ++i) {
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  return s;
}

}  // namespace

TEST_CASE("embedding matrix rejects invalid content") {
  CHECK_THROWS_AS(EmbeddingMatrix(Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingMatrix(Eigen::MatrixXd::Zero(3, 0)), InvalidArgument);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 2);
  m(2, 1) = std::nan("");
  CHECK_THROWS_WITH_AS(EmbeddingMatrix{m}, doctest::Contains("row 2"), FormatError);
  m(2, 1) = INFINITY;
  CHECK_THROWS_AS(EmbeddingMatrix{m}, FormatError);
}

TEST_CASE("binary loader round-trips a 1000 x 768 matrix") {
  testutil::TempDir dir("dataio_binary");
  testutil::write_file(dir / "z.emb", binary_header(1000, 768) + f32_payload(1000 * 768, 0.25f));
  const auto z = load_embeddings(dir / "z.emb", EmbeddingFormat::binary);
  CHECK(z.n_points() == 1000);
  CHECK(z.dim() == 768);
  CHECK(z.data()(999, 767) == 0.25);
}

TEST_CASE("binary loader reports a short payload") {
  testutil::TempDir dir("dataio_short");
  testutil::write_file(dir / "z.emb", binary_header(4, 3) + f32_payload(11, 1.0f));
  CHECK_THROWS_WITH_AS(load_embeddings(dir / "z.emb", EmbeddingFormat::binary), doctest::Contains("shape"),
                       FormatError);
  testutil::write_file(dir / "empty.emb", "");
  CHECK_THROWS_AS(load_embeddings(dir / "empty.emb", EmbeddingFormat::binary), FormatError);
  testutil::write_file(dir / "bad.emb", "XXXX12345678");
  CHECK_THROWS_AS(load_embeddings(dir / "bad.emb", EmbeddingFormat::binary), FormatError);
  CHECK_THROWS_AS(load_embeddings(dir / "missing.emb", EmbeddingFormat::binary), IoError);
}

TEST_CASE("csv loader reads the 2 x 2 identity") {
  testutil::TempDir dir("dataio_csv");
  testutil::write_file(dir / "z.csv", "1,0\n0,1\n");
  const auto z = load_embeddings(dir / "z.csv", format_from_path(dir / "z.csv"));
  CHECK(z.data() == Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("save then load preserves f32-representable values") {
  testutil::TempDir dir("dataio_roundtrip");
  Eigen::MatrixXd m(3, 2);
  m << 1, -2, 0.5, 0.25, 3, 4;
  save_embeddings(EmbeddingMatrix(m), dir / "m.emb");
  CHECK(load_embeddings(dir / "m.emb", EmbeddingFormat::binary).data() == m);
  save_embeddings_csv(EmbeddingMatrix(m), dir / "m.csv");
  CHECK(load_embeddings(dir / "m.csv", EmbeddingFormat::csv).data() == m);
}

TEST_CASE("sample_anchors") {
  SUBCASE("exhaustive budget returns every identity pair") {
    const auto s = sample_anchors(1000, 1000, 3);
    std::set<Eigen::Index> seen;
    for (const auto& p : s.pairs()) {
      CHECK(p.source == p.target);
      seen.insert(p.source);
    }
    CHECK(seen.size() == 1000);
  }
  SUBCASE("deterministic in the seed") {
    CHECK(sample_anchors(1000, 100, 7).pairs() == sample_anchors(1000, 100, 7).pairs());
    CHECK(sample_anchors(1000, 100, 7).pairs() != sample_anchors(1000, 100, 8).pairs());
  }
  SUBCASE("budget above N is an error") { CHECK_THROWS_AS(sample_anchors(10, 20, 0), InvalidArgument); }
}

TEST_CASE("load_anchor_set") {
  testutil::TempDir dir("dataio_anchors");
  testutil::write_file(dir / "ok.txt", "0,0\n5,5\n");
  CHECK(load_anchor_set(dir / "ok.txt", 10).budget() == 2);
  testutil::write_file(dir / "dup.txt", "0,0\n0,3\n");
  CHECK_THROWS_WITH_AS(load_anchor_set(dir / "dup.txt", 10), doctest::Contains("duplicate"), InvalidArgument);
  testutil::write_file(dir / "range.txt", "0,99\n");
  CHECK_THROWS_WITH_AS(load_anchor_set(dir / "range.txt", 10), doctest::Contains("range"), InvalidArgument);
  testutil::write_file(dir / "junk.txt", "0;1\n");
  CHECK_THROWS_AS(load_anchor_set(dir / "junk.txt", 10), FormatError);
}

TEST_CASE("config invariants") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate(1000));
  c.spectral_dim = 999;
  CHECK_THROWS_AS(c.validate(1000), InvalidArgument);
  c = {};
  c.lambda_comm = -1;
  CHECK_THROWS_AS(c.validate(1000), InvalidArgument);
  c = {};
  c.zoomout_max = 40;
  CHECK_THROWS_AS(c.validate(1000), InvalidArgument);
  c.zoomout = false;
  CHECK_NOTHROW(c.validate(1000));
}
