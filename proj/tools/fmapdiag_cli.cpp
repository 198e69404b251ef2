// Command-line front end: spectra, align, ablate-k, diagnose, compose, synth.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmapdiag/functional_map.hpp"
#include "fmapdiag/pipeline.hpp"
#include "fmapdiag/report.hpp"
#include "fmapdiag/synthgen.hpp"

namespace fs = std::filesystem;
using namespace fmapdiag;

namespace {

struct CommonOptions {
  PipelineConfig config;
  std::string zoomout = "";  // "start:max:steps"; empty means start follows --ks
  bool no_zoomout = false;
  std::string truncation = "first_coordinates";
  fs::path out = "run";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  auto& c = o.config;
  cmd->add_option("--knn", c.knn_k, "neighbours per point in the kNN graph")->capture_default_str();
  cmd->add_option("--ks", c.spectral_dim, "spectral basis size")->capture_default_str();
  cmd->add_option("--zoomout", o.zoomout, "refinement schedule start:max:steps (default <ks>:100:5)");
  cmd->add_flag("--no-zoomout", o.no_zoomout, "disable refinement");
  cmd->add_option("--lambda-comm", c.lambda_comm, "Laplacian commutativity weight")->capture_default_str();
  cmd->add_option("--lambda-tik", c.lambda_tik, "Tikhonov weight")->capture_default_str();
  cmd->add_option("--tau-probe", c.probe_smoothing, "heat smoothing of anchor probes")->capture_default_str();
  cmd->add_option("--hks-scales", c.hks_num_scales, "number of HKS scales")->capture_default_str();
  cmd->add_option("--recall-k", c.recall_cutoffs, "recall cutoffs")->capture_default_str();
  cmd->add_option("--captions-per-image", c.captions_per_image, "captions per image for caption-space recall")
      ->capture_default_str();
  cmd->add_option("--cca-ridge", c.cca_ridge, "CCA covariance ridge")->capture_default_str();
  cmd->add_flag("--procrustes-center", c.procrustes_center, "center anchors before Procrustes");
  cmd->add_option("--truncation", o.truncation, "common-dimension rule: first_coordinates or pca")
      ->check(CLI::IsMember({"first_coordinates", "pca"}))
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

/// Applies the derived options after parsing.
PipelineConfig finalize(CommonOptions& o) {
  PipelineConfig c = o.config;
  c.truncation = o.truncation == "pca" ? TruncationMode::pca : TruncationMode::first_coordinates;
  c.zoomout = !o.no_zoomout;
  c.zoomout_start = c.spectral_dim;
  if (!o.zoomout.empty()) {
    std::istringstream in(o.zoomout);
    char sep1 = 0, sep2 = 0;
    if (!(in >> c.zoomout_start >> sep1 >> c.zoomout_max >> sep2 >> c.zoomout_steps) || sep1 != ':' || sep2 != ':' ||
        !in.eof()) {
      throw StageError("config", "--zoomout expects start:max:steps, got '" + o.zoomout + "'");
    }
  }
  return c;
}

EmbeddingMatrix load(const fs::path& path, const std::string& tag) {
  return run_stage("load", [&] {
    auto z = load_embeddings(path, format_from_path(path));
    return EmbeddingMatrix(z.data(), tag);
  });
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path prepare_out(const fs::path& dir) {
  return run_stage("report", [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
  });
}

void write_config(const fs::path& dir, const std::string& command, const PipelineConfig& config, Json extra) {
  Json j{{"command", command}, {"config", to_json(config)}, {"timestamp", utc_timestamp()}};
  j.update(extra);
  write_json_atomic(dir / "config.json", j);
}

void print_notices(const std::vector<std::string>& notices) {
  for (const auto& n : notices) std::cerr << "notice: " << n << '\n';
}

void print_recall_summary(const std::vector<RecallRecord>& records) {
  for (const auto& r : records) {
    std::cout << r.method << " |S|=" << r.budget;
    if (r.spectral_dim > 0) std::cout << " k_s=" << r.spectral_dim;
    for (const auto& e : r.image.entries()) std::cout << ' ' << to_string(e.direction) << " R@" << e.k << '=' << e.recall;
    std::cout << '\n';
  }
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> methods;
  for (const auto& n : names) {
    if (n == "all") return all_methods();
    methods.push_back(run_stage("config", [&] { return method_from_string(n); }));
  }
  return methods;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral functional-map diagnostics for embedding spaces"};
  app.require_subcommand(1);

  CommonOptions common;
  fs::path source, target, third, anchors_file;
  std::vector<std::string> method_names{"fmap"};
  ExperimentSpec spec;
  int budget = 50;

  auto* spectra = app.add_subcommand("spectra", "Laplacian eigenbases and eigenvalue CSV for two modalities");
  auto* align = app.add_subcommand("align", "retrieval over the anchor-budget grid");
  auto* ablate = app.add_subcommand("ablate-k", "spectral-dimension sweep without refinement");
  auto* diagnose_cmd = app.add_subcommand("diagnose", "compatibility diagnostics of one solved map");
  auto* compose_cmd = app.add_subcommand("compose", "two-hop map composition against a direct map");
  auto* synth = app.add_subcommand("synth", "write a synthetic embedding pair");

  for (auto* cmd : {spectra, align, ablate, diagnose_cmd}) {
    add_common(cmd, common);
    cmd->add_option("--source", source, "source embeddings (.emb or .csv)")->required();
    cmd->add_option("--target", target, "target embeddings (.emb or .csv)")->required();
  }
  add_common(compose_cmd, common);
  compose_cmd->add_option("--a", source, "first modality")->required();
  compose_cmd->add_option("--b", target, "intermediate modality")->required();
  compose_cmd->add_option("--c", third, "last modality")->required();
  compose_cmd->add_option("--budget", spec.compose_budget, "anchors per hop")->capture_default_str();
  compose_cmd->add_option("--repeats", spec.repeats, "number of consecutive seeds")->capture_default_str();

  align->add_option("--method", method_names, "fmap, fmap_hks, raw_cosine, procrustes, relative, cca or all")
      ->capture_default_str();
  align->add_option("--budgets", spec.anchor_budgets, "anchor budgets")->capture_default_str();
  align->add_option("--repeats", spec.repeats, "number of consecutive seeds")->capture_default_str();
  ablate->add_option("--ks-sweep", spec.spectral_dims, "spectral dimensions")->capture_default_str();
  ablate->add_option("--budget", spec.ablation_budget, "anchor budget")->capture_default_str();
  ablate->add_option("--repeats", spec.repeats, "number of consecutive seeds")->capture_default_str();
  diagnose_cmd->add_option("--budget", budget, "anchor budget")->capture_default_str();
  for (auto* cmd : {align, ablate, diagnose_cmd}) {
    cmd->add_option("--anchors", anchors_file, "fixed anchor pairs, one 'src,dst' per line");
  }

  long long synth_n = 500, synth_d = 16;
  std::string relation = "isometric_noisy", shape = "swiss_roll";
  double noise = 0.01;
  CloudStructure structure;
  std::uint64_t synth_seed = 0;
  fs::path synth_out = "synthetic";
  synth->add_option("--n", synth_n, "points")->capture_default_str();
  synth->add_option("--d", synth_d, "dimension")->capture_default_str();
  synth->add_option("--relation", relation, "identical, isometric, isometric_noisy or unaligned")
      ->check(CLI::IsMember({"identical", "isometric", "isometric_noisy", "unaligned"}))
      ->capture_default_str();
  synth->add_option("--shape", shape, "gaussian_mixture or swiss_roll")
      ->check(CLI::IsMember({"gaussian_mixture", "swiss_roll"}))
      ->capture_default_str();
  synth->add_option("--components", structure.components, "mixture components or roll segments")
      ->capture_default_str();
  synth->add_option("--centre-distance", structure.centre_distance, "typical mixture centre distance in sd units")
      ->capture_default_str();
  synth->add_option("--roll-height", structure.roll_height, "swiss roll width")->capture_default_str();
  synth->add_option("--noise", noise, "noise scale relative to the mean row norm")->capture_default_str();
  synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      structure.shape = shape == "swiss_roll" ? CloudShape::swiss_roll : CloudShape::gaussian_mixture;
      const auto base = run_stage("synth", [&] { return gen_base_cloud(synth_n, synth_d, structure, synth_seed); });
      const auto pair = run_stage("synth", [&] {
        return gen_pair(base, relation_from_string(relation), noise, derive_seed(synth_seed, 1));
      });
      run_stage("report", [&] { save_pair(pair, synth_out); });
      std::cout << "wrote " << (synth_out / "a.emb").string() << " and " << (synth_out / "b.emb").string() << '\n';
      return 0;
    }

    const PipelineConfig config = finalize(common);
    const auto src = load(source, "source");
    const auto tgt = load(target, "target");
    if (!anchors_file.empty()) {
      spec.anchors = run_stage("anchors", [&] { return load_anchor_set(anchors_file, src.n_points()); });
    }
    Json inputs{{"source", source.string()}, {"target", target.string()}};

    if (spectra->parsed()) {
      const auto result = run_spectra(src, tgt, config);
      const auto dir = prepare_out(common.out);
      run_stage("report", [&] {
        save_basis(result.source, dir / "source");
        save_basis(result.target, dir / "target");
        write_text_atomic(dir / "spectra.csv", spectra_csv(result.source.values(), result.target.values()));
        write_config(dir, "spectra", config, {{"inputs", inputs}});
      });
    } else if (align->parsed()) {
      spec.methods = parse_methods(method_names);
      const auto result = run_align(src, tgt, config, spec);
      print_notices(result.notices);
      const auto dir = prepare_out(common.out);
      run_stage("report", [&] {
        write_text_atomic(dir / "recall.csv", recall_csv(result.records));
        write_json_atomic(dir / "recall.json", Json{{"config", to_json(config)}, {"recall", recall_json(result.records)}});
        if (!result.diagnostics.empty()) {
          write_json_atomic(dir / "diagnostics.json",
                            Json{{"config", to_json(config)}, {"diagnostics", diagnostics_json(result.diagnostics)}});
        }
        write_config(dir, "align", config, {{"inputs", inputs}, {"notices", result.notices}});
      });
      print_recall_summary(result.records);
    } else if (ablate->parsed()) {
      const auto result = run_ablate_k(src, tgt, config, spec);
      print_notices(result.notices);
      const auto dir = prepare_out(common.out);
      run_stage("report", [&] {
        write_text_atomic(dir / "recall.csv", recall_csv(result.records));
        write_json_atomic(dir / "recall.json", Json{{"config", to_json(config)}, {"recall", recall_json(result.records)}});
        write_config(dir, "ablate-k", config, {{"inputs", inputs}, {"notices", result.notices}});
      });
      print_recall_summary(result.records);
    } else if (diagnose_cmd->parsed()) {
      const AnchorSet anchors = spec.anchors ? *spec.anchors : run_stage("anchors", [&] {
        if (budget < 1 || budget > src.n_points()) throw InvalidArgument("budget must lie in [1, N]");
        return sample_anchors(src.n_points(), static_cast<std::size_t>(budget), config.seed);
      });
      const auto result = run_diagnose(src, tgt, config, anchors);
      const auto dir = prepare_out(common.out);
      run_stage("report", [&] {
        write_report(result.report, config, dir / "diagnostics.json");
        write_text_atomic(dir / "diagnostics.csv",
                          diagnostics_csv(result.report, result.source.values(), result.target.values()));
        write_text_atomic(dir / "spectra.csv", spectra_csv(result.source.values(), result.target.values()));
        save_fmap(result.map, dir / "fmap.emb", to_json(config).dump());
        write_config(dir, "diagnose", config, {{"inputs", inputs}, {"budget", anchors.budget()}});
      });
      const auto& r = result.report;
      std::cout << "spectral_distance " << r.spectral_distance << "\ndiag_dominance_mean " << r.diag_dominance_mean
                << "\northogonality_error " << r.orthogonality_error << "\nshape_matching_profile "
                << (kShapeMatchingProfile.passes(r) ? "pass" : "fail") << '\n';
    } else if (compose_cmd->parsed()) {
      const auto c = load(third, "third");
      const auto result = run_compose(src, tgt, c, config, spec);
      print_notices(result.notices);
      const auto dir = prepare_out(common.out);
      inputs["third"] = third.string();
      run_stage("report", [&] {
        write_text_atomic(dir / "recall.csv", recall_csv(result.records));
        write_json_atomic(dir / "recall.json", Json{{"config", to_json(config)}, {"recall", recall_json(result.records)}});
        write_config(dir, "compose", config, {{"inputs", inputs}, {"notices", result.notices}});
      });
      print_recall_summary(result.records);
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: [internal] " << e.what() << '\n';
    return 3;
  }
  return 0;
}
