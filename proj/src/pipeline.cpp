#include "fmapdiag/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "fmapdiag/baselines.hpp"
#include "fmapdiag/graph_laplacian.hpp"

namespace fmapdiag {
namespace {

std::string number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void require_same_rows(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.n_points() != b.n_points()) {
    throw StageError("input", "modalities have different N (" + std::to_string(a.n_points()) + " vs " +
                                  std::to_string(b.n_points()) + ")");
  }
}

Eigen::Index basis_dim(const PipelineConfig& config) {
  return config.zoomout ? std::max(config.spectral_dim, config.zoomout_max) : config.spectral_dim;
}

FmapWeights weights_of(const PipelineConfig& c) { return {c.lambda_comm, c.lambda_tik}; }

FunctionalMap fit_fmap(const SpectralBasis& source, const SpectralBasis& target, const AnchorSet& anchors,
                       const PipelineConfig& config, Eigen::Index ks) {
  return run_stage("fmap_solve", [&] {
    const auto s = source.truncated(ks);
    const auto t = target.truncated(ks);
    return solve_fmap(anchor_probes(s, t, anchors, config.probe_smoothing), s.values(), t.values(),
                      weights_of(config));
  });
}

FunctionalMap refine(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target,
                     const PipelineConfig& config) {
  if (!config.zoomout) return map;
  return run_stage("zoomout", [&] {
    return zoomout(map, source, target, {config.zoomout_start, config.zoomout_max, config.zoomout_steps});
  });
}

RecallRecord make_record(const std::string& method, int budget, int ks, std::uint64_t seed, const ScoreMatrix& scores,
                         const PipelineConfig& config) {
  RecallRecord r{method, budget, ks, seed};
  std::tie(r.image, r.caption) = evaluate_recall(scores, config);
  return r;
}

std::vector<std::uint64_t> seeds_of(const PipelineConfig& config, const ExperimentSpec& spec) {
  if (spec.repeats < 1) throw StageError("config", "repeats must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < spec.repeats; ++r) seeds.push_back(config.seed + static_cast<std::uint64_t>(r));
  return seeds;
}

/// Anchor draws for every budget of the grid, or the fixed set.
std::optional<AnchorSet> anchors_for(const ExperimentSpec& spec, Eigen::Index n, int budget, std::uint64_t seed,
                                     std::vector<std::string>& notices) {
  if (spec.anchors) return spec.anchors;
  if (budget < 1) throw StageError("anchors", "anchor budget must be >= 1");
  if (budget > n) {
    notices.push_back("budget " + std::to_string(budget) + " exceeds N=" + std::to_string(n) + "; skipped");
    return std::nullopt;
  }
  return run_stage("anchors", [&] { return sample_anchors(n, static_cast<std::size_t>(budget), seed); });
}

std::vector<int> budget_grid(const ExperimentSpec& spec) {
  if (spec.anchors) return {static_cast<int>(spec.anchors->budget())};
  return spec.anchor_budgets;
}

RecallTable chance_table(Eigen::Index n, std::span<const int> ks) {
  RecallTable t(Protocol::image_space);
  for (const auto direction : {Direction::i2t, Direction::t2i}) {
    for (int k : ks) t.set(direction, k, 100.0 * static_cast<double>(std::min<Eigen::Index>(k, n)) / n);
  }
  return t;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::fmap: return "fmap";
    case Method::fmap_hks: return "fmap_hks";
    case Method::raw_cosine: return "raw_cosine";
    case Method::procrustes: return "procrustes";
    case Method::relative: return "relative";
    case Method::cca: return "cca";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (const auto m : all_methods()) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown method '" + s + "'");
}

std::vector<Method> all_methods() {
  return {Method::fmap, Method::fmap_hks, Method::raw_cosine, Method::procrustes, Method::relative, Method::cca};
}

bool uses_anchors(Method m) { return m != Method::fmap_hks && m != Method::raw_cosine; }

SpectralBasis compute_basis(const EmbeddingMatrix& z, int knn_k, Eigen::Index dim,
                            const SpectralBasisOptions& options) {
  const auto graph = run_stage("graph", [&] { return knn_graph(z, knn_k); });
  const auto laplacian = run_stage("laplacian", [&] { return normalized_laplacian(graph); });
  return run_stage("spectral_basis", [&] { return spectral_basis(laplacian, dim, options); });
}

Eigen::VectorXd shared_hks_scales(const SpectralBasis& source, const SpectralBasis& target, int num_scales) {
  const double lo = std::min(source.values().minCoeff(), target.values().minCoeff());
  const double hi = std::max(source.values().maxCoeff(), target.values().maxCoeff());
  return hks_scales(lo, hi, num_scales);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::pair<RecallTable, RecallTable> evaluate_recall(const ScoreMatrix& i2t, const PipelineConfig& config) {
  return run_stage("retrieval", [&] {
    const auto& ks = config.recall_cutoffs;
    const auto needed = required_image_cutoffs(ks, config.captions_per_image);
    const RecallTable full = bidirectional_recall(i2t, needed);
    RecallTable image(Protocol::image_space);
    for (const auto& e : full.entries()) {
      if (std::find(ks.begin(), ks.end(), e.k) != ks.end()) image.set(e.direction, e.k, e.recall);
    }
    RecallTable caption = caption_space_recall(full, config.captions_per_image, ks);
    check_caption_protocol(caption, config.captions_per_image);
    return std::pair{image, caption};
  });
}

SpectraResult run_spectra(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config) {
  require_same_rows(source, target);
  run_stage("config", [&] { config.validate(source.n_points()); });
  return {compute_basis(source, config.knn_k, config.spectral_dim),
          compute_basis(target, config.knn_k, config.spectral_dim)};
}

AlignResult run_align(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config,
                      const ExperimentSpec& spec) {
  require_same_rows(source, target);
  run_stage("config", [&] { config.validate(source.n_points()); });
  const Eigen::Index n = source.n_points();
  const bool spectral = std::any_of(spec.methods.begin(), spec.methods.end(),
                                    [](Method m) { return m == Method::fmap || m == Method::fmap_hks; });
  std::optional<SpectralBasis> src_basis, tgt_basis;
  if (spectral) {
    src_basis = compute_basis(source, config.knn_k, basis_dim(config));
    tgt_basis = compute_basis(target, config.knn_k, basis_dim(config));
  }
  const int ks = config.spectral_dim;

  AlignResult out;
  for (const auto seed : seeds_of(config, spec)) {
    for (const auto method : spec.methods) {
      const std::string name = to_string(method);
      if (!uses_anchors(method)) {
        ScoreMatrix scores = [&] {
          if (method == Method::raw_cosine) {
            return run_stage("baseline:raw_cosine",
                             [&] { return raw_cosine_scores(source, target, config.truncation); });
          }
          const auto s = src_basis->truncated(ks);
          const auto t = tgt_basis->truncated(ks);
          const auto c = run_stage("fmap_solve", [&] {
            const auto scales = shared_hks_scales(s, t, config.hks_num_scales);
            return solve_fmap_unsupervised(hks(s, scales), hks(t, scales), s, t, weights_of(config));
          });
          const auto refined = refine(c, *src_basis, *tgt_basis, config);
          return run_stage("retrieval", [&] { return spectral_scores(refined, *src_basis, *tgt_basis); });
        }();
        out.records.push_back(make_record(name, 0, method == Method::fmap_hks ? ks : 0, seed, scores, config));
        continue;
      }
      for (const int budget : budget_grid(spec)) {
        if (method == Method::cca && budget < 20) {
          out.notices.push_back("cca skipped at |S|=" + std::to_string(budget) + ": insufficient anchors (< 20)");
          continue;
        }
        const auto anchors = anchors_for(spec, n, budget, seed, out.notices);
        if (!anchors) continue;
        const ScoreMatrix scores = [&] {
          switch (method) {
            case Method::fmap: {
              const auto c = fit_fmap(*src_basis, *tgt_basis, *anchors, config, ks);
              auto report = run_stage("diagnostics", [&] {
                return diagnose(c, src_basis->truncated(ks), tgt_basis->truncated(ks));
              });
              out.diagnostics.push_back({budget, seed, "solved", std::move(report)});
              const auto refined = refine(c, *src_basis, *tgt_basis, config);
              if (config.zoomout) {
                out.diagnostics.push_back({budget, seed, "refined", run_stage("diagnostics", [&] {
                                             return diagnose(refined, *src_basis, *tgt_basis);
                                           })});
              }
              return run_stage("retrieval", [&] { return spectral_scores(refined, *src_basis, *tgt_basis); });
            }
            case Method::procrustes:
              return run_stage("baseline:procrustes", [&] {
                const auto fit = fit_procrustes(source, target, *anchors, config.procrustes_center, config.truncation);
                return procrustes_scores(fit, source, target, config.truncation);
              });
            case Method::relative:
              return run_stage("baseline:relative", [&] { return relative_scores(source, target, *anchors); });
            case Method::cca:
              return run_stage("baseline:cca", [&] {
                const Eigen::Index comps =
                    std::min({static_cast<Eigen::Index>(anchors->budget()) - 1, source.dim(), target.dim()});
                const auto fit = fit_cca(source, target, *anchors, config.cca_ridge, comps);
                return cca_scores(fit, source, target);
              });
            default:
              throw StageError("align", "unexpected method " + name);
          }
        }();
        out.records.push_back(make_record(name, budget, method == Method::fmap ? ks : 0, seed, scores, config));
      }
    }
  }
  return out;
}

AlignResult run_ablate_k(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config,
                         const ExperimentSpec& spec) {
  require_same_rows(source, target);
  if (spec.spectral_dims.empty()) throw StageError("config", "no spectral dimensions to sweep");
  PipelineConfig local = config;
  local.zoomout = false;
  local.spectral_dim = *std::max_element(spec.spectral_dims.begin(), spec.spectral_dims.end());
  run_stage("config", [&] { local.validate(source.n_points()); });
  for (int k : spec.spectral_dims) {
    if (k < 1) throw StageError("config", "spectral dimensions must be >= 1");
  }
  const auto src_basis = compute_basis(source, local.knn_k, local.spectral_dim);
  const auto tgt_basis = compute_basis(target, local.knn_k, local.spectral_dim);

  AlignResult out;
  for (const auto seed : seeds_of(config, spec)) {
    const auto anchors = anchors_for(spec, source.n_points(), spec.ablation_budget, seed, out.notices);
    if (!anchors) continue;
    const int budget = static_cast<int>(anchors->budget());
    std::vector<double> r1;
    for (const int ks : spec.spectral_dims) {
      const auto c = fit_fmap(src_basis, tgt_basis, *anchors, local, ks);
      const auto scores = run_stage("retrieval", [&] { return spectral_scores(c, src_basis, tgt_basis); });
      out.records.push_back(make_record("fmap", budget, ks, seed, scores, local));
      if (out.records.back().image.contains(Direction::i2t, 1)) r1.push_back(out.records.back().image.at(Direction::i2t, 1));
    }
    const bool monotone = std::is_sorted(r1.begin(), r1.end());
    out.notices.push_back("seed " + std::to_string(seed) + ": i2t R@1 " +
                          (monotone ? "is nondecreasing" : "is not monotone") + " in k_s");
  }
  return out;
}

DiagnoseResult run_diagnose(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config,
                            const AnchorSet& anchors) {
  require_same_rows(source, target);
  PipelineConfig local = config;
  local.zoomout = false;
  run_stage("config", [&] { local.validate(source.n_points()); });
  auto src = compute_basis(source, local.knn_k, local.spectral_dim);
  auto tgt = compute_basis(target, local.knn_k, local.spectral_dim);
  auto map = fit_fmap(src, tgt, anchors, local, local.spectral_dim);
  auto report = run_stage("diagnostics", [&] { return diagnose(map, src, tgt); });
  return {std::move(map), std::move(report), std::move(src), std::move(tgt)};
}

ComposeResult run_compose(const EmbeddingMatrix& a, const EmbeddingMatrix& b, const EmbeddingMatrix& c,
                          const PipelineConfig& config, const ExperimentSpec& spec) {
  require_same_rows(a, b);
  require_same_rows(a, c);
  run_stage("config", [&] { config.validate(a.n_points()); });
  const Eigen::Index n = a.n_points();
  const auto dim = basis_dim(config);
  const auto basis_a = compute_basis(a, config.knn_k, dim);
  const auto basis_b = compute_basis(b, config.knn_k, dim);
  const auto basis_c = compute_basis(c, config.knn_k, dim);
  const int ks = config.spectral_dim;

  ComposeResult out;
  for (const auto seed : seeds_of(config, spec)) {
    auto draw = [&](std::uint64_t stream) {
      if (spec.compose_budget < 1 || spec.compose_budget > n) {
        throw StageError("anchors", "compose budget must lie in [1, N]");
      }
      return run_stage("anchors", [&] {
        return sample_anchors(n, static_cast<std::size_t>(spec.compose_budget), derive_seed(seed, stream));
      });
    };
    const auto ab = refine(fit_fmap(basis_a, basis_b, draw(1), config, ks), basis_a, basis_b, config);
    const auto bc = refine(fit_fmap(basis_b, basis_c, draw(2), config, ks), basis_b, basis_c, config);
    const auto composed = compose(ab, bc);
    const auto direct = refine(fit_fmap(basis_a, basis_c, draw(3), config, ks), basis_a, basis_c, config);

    const auto composed_scores = run_stage("retrieval", [&] { return spectral_scores(composed, basis_a, basis_c); });
    const auto direct_scores = run_stage("retrieval", [&] { return spectral_scores(direct, basis_a, basis_c); });
    out.records.push_back(make_record("composed", spec.compose_budget, ks, seed, composed_scores, config));
    out.records.push_back(make_record("direct", spec.compose_budget, ks, seed, direct_scores, config));

    RecallRecord chance{"random", 0, 0, seed};
    const auto needed = required_image_cutoffs(config.recall_cutoffs, config.captions_per_image);
    const auto full = chance_table(n, needed);
    chance.image = chance_table(n, config.recall_cutoffs);
    chance.caption = caption_space_recall(full, config.captions_per_image, config.recall_cutoffs);
    check_caption_protocol(chance.caption, config.captions_per_image);
    out.records.push_back(std::move(chance));

    const double comp_r1 = out.records[out.records.size() - 3].image.at(Direction::i2t, config.recall_cutoffs.front());
    const double dir_r1 = out.records[out.records.size() - 2].image.at(Direction::i2t, config.recall_cutoffs.front());
    out.notices.push_back("seed " + std::to_string(seed) + ": composed i2t R@" +
                          std::to_string(config.recall_cutoffs.front()) + " " + number(comp_r1) +
                          (comp_r1 <= dir_r1 ? " <= " : " > ") + "direct " + number(dir_r1));
  }
  return out;
}

std::string recall_csv(const std::vector<RecallRecord>& records) {
  std::ostringstream os;
  os << "method,budget,spectral_dim,seed,protocol,direction,k,recall\n";
  for (const auto& r : records) {
    for (const auto* table : {&r.image, &r.caption}) {
      for (const auto& e : table->entries()) {
        os << r.method << ',' << r.budget << ',' << r.spectral_dim << ',' << r.seed << ','
           << to_string(table->protocol()) << ',' << to_string(e.direction) << ',' << e.k << ',' << number(e.recall)
           << '\n';
      }
    }
  }
  return os.str();
}

Json recall_json(const std::vector<RecallRecord>& records) {
  Json rows = Json::array();
  for (const auto& r : records) {
    rows.push_back(Json{{"method", r.method},
                        {"budget", r.budget},
                        {"spectral_dim", r.spectral_dim},
                        {"seed", r.seed},
                        {"image_space", to_json(r.image)},
                        {"caption_space", to_json(r.caption)}});
  }
  return rows;
}

std::string spectra_csv(const Eigen::VectorXd& source_values, const Eigen::VectorXd& target_values) {
  std::ostringstream os;
  os << "index,lambda_source,lambda_target,ratio\n";
  const Eigen::Index k = std::min(source_values.size(), target_values.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    os << i << ',' << number(source_values(i)) << ',' << number(target_values(i)) << ','
       << number(source_values(i) / target_values(i)) << '\n';
  }
  return os.str();
}

std::string diagnostics_csv(const DiagnosticsReport& report, const Eigen::VectorXd& source_values,
                            const Eigen::VectorXd& target_values) {
  std::ostringstream os;
  os << "index,lambda_source,lambda_target,ratio,rho\n";
  const Eigen::Index k = std::min({source_values.size(), target_values.size(), report.diag_dominance.size()});
  for (Eigen::Index i = 0; i < k; ++i) {
    os << i << ',' << number(source_values(i)) << ',' << number(target_values(i)) << ','
       << number(source_values(i) / target_values(i)) << ',' << number(report.diag_dominance(i)) << '\n';
  }
  return os.str();
}

Json diagnostics_json(const std::vector<DiagnosticsRecord>& records) {
  Json rows = Json::array();
  for (const auto& r : records) {
    Json row{{"budget", r.budget}, {"seed", r.seed}, {"map", r.map_stage}};
    row.update(to_json(r.report));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fmapdiag
