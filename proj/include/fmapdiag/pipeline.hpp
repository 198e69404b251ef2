#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmapdiag/dataio.hpp"
#include "fmapdiag/diagnostics.hpp"
#include "fmapdiag/error.hpp"
#include "fmapdiag/functional_map.hpp"
#include "fmapdiag/report.hpp"
#include "fmapdiag/retrieval.hpp"
#include "fmapdiag/spectral_basis.hpp"

namespace fmapdiag {

enum class Method { fmap, fmap_hks, raw_cosine, procrustes, relative, cca };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();
/// Whether the method consumes an anchor set (and so is swept over budgets).
bool uses_anchors(Method m);

struct ExperimentSpec {
  std::vector<Method> methods{Method::fmap};
  std::vector<int> anchor_budgets{5, 10, 20, 50, 100, 500};
  std::vector<int> spectral_dims{10, 20, 30, 50, 70, 100};
  int ablation_budget = 50;
  int compose_budget = 20;
  /// Replaces sampled anchors; the budget grid collapses to its size.
  std::optional<AnchorSet> anchors;
  /// Seeds config.seed, config.seed + 1, ...; one by default.
  int repeats = 1;
};

/// Runs `body`, rethrowing library errors as StageError tagged with `stage`.
template <class F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  }
}

/// kNN graph, normalized Laplacian and the `dim` smallest non-trivial
/// eigenpairs of one modality.
SpectralBasis compute_basis(const EmbeddingMatrix& z, int knn_k, Eigen::Index dim,
                            const SpectralBasisOptions& options = {});

/// Scales shared by two bases, spanning the union of their spectra.
Eigen::VectorXd shared_hks_scales(const SpectralBasis& source, const SpectralBasis& target, int num_scales);

/// Independent stream `stream` derived from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct RecallRecord {
  std::string method;
  int budget = 0;        ///< |S|; 0 for anchor-free methods
  int spectral_dim = 0;  ///< k_s for spectral methods, 0 otherwise
  std::uint64_t seed = 0;
  RecallTable image{Protocol::image_space};
  RecallTable caption{Protocol::caption_space};
};

struct DiagnosticsRecord {
  int budget = 0;
  std::uint64_t seed = 0;
  std::string map_stage;  ///< "solved" (least-squares map) or "refined" (after ZoomOut)
  DiagnosticsReport report;
};

struct SpectraResult {
  SpectralBasis source;
  SpectralBasis target;
};

struct AlignResult {
  std::vector<RecallRecord> records;
  std::vector<DiagnosticsRecord> diagnostics;  ///< fmap only, per (budget, seed, map stage)
  std::vector<std::string> notices;
};

struct DiagnoseResult {
  FunctionalMap map;  ///< solved map before any refinement
  DiagnosticsReport report;
  SpectralBasis source;
  SpectralBasis target;
};

struct ComposeResult {
  std::vector<RecallRecord> records;  ///< methods "composed", "direct", "random"
  std::vector<std::string> notices;
};

SpectraResult run_spectra(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config);

AlignResult run_align(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config,
                      const ExperimentSpec& spec);

/// Functional-map sweep over spectral_dims at ablation_budget anchors with
/// refinement disabled. Bases are computed once at the largest dimension.
AlignResult run_ablate_k(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config,
                         const ExperimentSpec& spec);

/// Solves a single map with `anchors` and reports its diagnostics.
DiagnoseResult run_diagnose(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const PipelineConfig& config,
                            const AnchorSet& anchors);

/// a->b and b->c fitted on independent anchor draws, composed, and compared
/// with a direct a->c map and the analytic chance level.
ComposeResult run_compose(const EmbeddingMatrix& a, const EmbeddingMatrix& b, const EmbeddingMatrix& c,
                          const PipelineConfig& config, const ExperimentSpec& spec);

/// Image-space and caption-space tables from one i2t score matrix; the
/// caption-space table is checked before it is returned.
std::pair<RecallTable, RecallTable> evaluate_recall(const ScoreMatrix& i2t, const PipelineConfig& config);

// Plot-ready outputs.
std::string recall_csv(const std::vector<RecallRecord>& records);
Json recall_json(const std::vector<RecallRecord>& records);
/// index, source eigenvalue, target eigenvalue, ratio.
std::string spectra_csv(const Eigen::VectorXd& source_values, const Eigen::VectorXd& target_values);
/// index, source eigenvalue, target eigenvalue, ratio, rho_i.
std::string diagnostics_csv(const DiagnosticsReport& report, const Eigen::VectorXd& source_values,
                            const Eigen::VectorXd& target_values);
Json diagnostics_json(const std::vector<DiagnosticsRecord>& records);

}  // namespace fmapdiag
