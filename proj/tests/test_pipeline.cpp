#include <doctest.h>

#include <algorithm>
#include <map>

#include "fmapdiag/error.hpp"
#include "fmapdiag/pipeline.hpp"
#include "fmapdiag/synthgen.hpp"

using namespace fmapdiag;

namespace {

SyntheticPair mixture_pair(Eigen::Index n, PairRelation relation, std::uint64_t seed = 1) {
  return gen_pair(gen_base_cloud(n, 8, CloudStructure{}, seed), relation, 0.0, seed + 100);
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.spectral_dim = 20;
  c.zoomout_start = 20;
  c.zoomout_max = 40;
  c.zoomout_steps = 4;
  return c;
}

bool has_notice(const std::vector<std::string>& notices, const std::string& needle) {
  return std::any_of(notices.begin(), notices.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

void check_caption_tables(const std::vector<RecallRecord>& records) {
  for (const auto& r : records) {
    CAPTURE(r.method);
    CHECK(r.caption.at(Direction::i2t, 1) == r.caption.at(Direction::i2t, 5));
  }
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (const auto m : all_methods()) CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(method_from_string("svm"), InvalidArgument);
  CHECK(!uses_anchors(Method::raw_cosine));
  CHECK(uses_anchors(Method::cca));
}

TEST_CASE("derived seeds are distinct and stable") {
  CHECK(derive_seed(7, 1) == derive_seed(7, 1));
  CHECK(derive_seed(7, 1) != derive_seed(7, 2));
  CHECK(derive_seed(7, 1) != derive_seed(8, 1));
}

TEST_CASE("align sweeps every budget") {
  const auto pair = mixture_pair(600, PairRelation::isometric);
  ExperimentSpec spec;
  const auto out = run_align(pair.a, pair.b, small_config(), spec);
  REQUIRE(out.records.size() == 6);
  std::vector<int> budgets;
  for (const auto& r : out.records) {
    CHECK(r.method == "fmap");
    CHECK(r.spectral_dim == 20);
    budgets.push_back(r.budget);
  }
  CHECK(budgets == spec.anchor_budgets);
  // Solved and refined diagnostics per budget.
  CHECK(out.diagnostics.size() == 12);
  CHECK(out.records.back().image.at(Direction::i2t, 1) == 100.0);
  check_caption_tables(out.records);
}

TEST_CASE("align with every method") {
  const auto pair = mixture_pair(120, PairRelation::isometric);
  ExperimentSpec spec;
  spec.methods = all_methods();
  spec.anchor_budgets = {5, 50, 500};
  const auto out = run_align(pair.a, pair.b, small_config(), spec);
  std::map<std::string, int> rows;
  for (const auto& r : out.records) ++rows[r.method];
  CHECK(rows["fmap"] == 2);
  CHECK(rows["procrustes"] == 2);
  CHECK(rows["relative"] == 2);
  CHECK(rows["cca"] == 1);
  CHECK(rows["raw_cosine"] == 1);
  CHECK(rows["fmap_hks"] == 1);
  CHECK(has_notice(out.notices, "cca skipped at |S|=5"));
  CHECK(has_notice(out.notices, "budget 500 exceeds N=120"));
  check_caption_tables(out.records);
}

TEST_CASE("ablation reports one row per spectral dimension") {
  const auto pair = mixture_pair(200, PairRelation::isometric);
  ExperimentSpec spec;
  spec.spectral_dims = {10, 20, 30};
  const auto out = run_ablate_k(pair.a, pair.b, small_config(), spec);
  REQUIRE(out.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out.records[i].spectral_dim == spec.spectral_dims[i]);
  CHECK(has_notice(out.notices, "i2t R@1"));
  check_caption_tables(out.records);
}

TEST_CASE("composing identical modalities matches the direct map") {
  const auto pair = mixture_pair(150, PairRelation::identical);
  PipelineConfig config = small_config();
  const auto out = run_compose(pair.a, pair.a, pair.a, config, ExperimentSpec{});
  REQUIRE(out.records.size() == 3);
  CHECK(out.records[0].method == "composed");
  CHECK(out.records[0].image.at(Direction::i2t, 1) == doctest::Approx(100.0));
  CHECK(out.records[1].image.at(Direction::i2t, 1) == doctest::Approx(100.0));
  CHECK(out.records[2].image.at(Direction::i2t, 1) == doctest::Approx(100.0 / 150.0));
  CHECK(out.notices.size() == 1);
  check_caption_tables(out.records);
}

TEST_CASE("diagnose returns the solved map") {
  const auto pair = mixture_pair(150, PairRelation::isometric);
  const auto out = run_diagnose(pair.a, pair.b, small_config(), sample_anchors(150, 50, 0));
  CHECK(out.map.source_dim() == 20);
  CHECK(out.report.diag_dominance.size() == 20);
  const auto csv = diagnostics_csv(out.report, out.source.values(), out.target.values());
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
  CHECK(csv.rfind("index,lambda_source,lambda_target,ratio,rho\n", 0) == 0);
}

TEST_CASE("errors carry their stage") {
  const auto pair = mixture_pair(60, PairRelation::isometric);
  PipelineConfig too_big = small_config();
  too_big.spectral_dim = 60;
  too_big.zoomout = false;
  CHECK_THROWS_WITH_AS(run_align(pair.a, pair.b, too_big, ExperimentSpec{}), doctest::Contains("[config]"), StageError);

  const EmbeddingMatrix shorter(pair.a.data().topRows(50));
  CHECK_THROWS_WITH_AS(run_align(shorter, pair.b, small_config(), ExperimentSpec{}), doctest::Contains("[input]"),
                       StageError);

  // All points coincide, so the kNN bandwidth is zero.
  const Eigen::MatrixXd dup = pair.a.data().row(0).replicate(60, 1);
  try {
    run_spectra(EmbeddingMatrix(dup), pair.b, small_config());
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "graph");
  }
}

TEST_CASE("outputs are deterministic") {
  const auto pair = mixture_pair(120, PairRelation::isometric_noisy);
  ExperimentSpec spec;
  spec.methods = {Method::fmap, Method::procrustes};
  spec.anchor_budgets = {10, 40};
  spec.repeats = 2;
  const auto a = run_align(pair.a, pair.b, small_config(), spec);
  const auto b = run_align(pair.a, pair.b, small_config(), spec);
  CHECK(recall_json(a.records).dump() == recall_json(b.records).dump());
  CHECK(diagnostics_json(a.diagnostics).dump() == diagnostics_json(b.diagnostics).dump());
  CHECK(recall_csv(a.records) == recall_csv(b.records));
  CHECK(a.records.size() == 8);
}
