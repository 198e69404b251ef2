#include "fmapdiag/report.hpp"

#include <fstream>
#include <sstream>

#include "fmapdiag/error.hpp"

namespace fmapdiag {
namespace {

std::string truncation_name(TruncationMode m) { return m == TruncationMode::pca ? "pca" : "first_coordinates"; }

TruncationMode truncation_from_name(const std::string& s) {
  if (s == "pca") return TruncationMode::pca;
  if (s == "first_coordinates") return TruncationMode::first_coordinates;
  throw FormatError("unknown truncation mode '" + s + "'");
}

std::string cutoff_key(int k) { return "R@" + std::to_string(k); }

}  // namespace

Json to_json(const PipelineConfig& c) {
  return Json{{"knn_k", c.knn_k},
              {"spectral_dim", c.spectral_dim},
              {"zoomout", c.zoomout},
              {"zoomout_start", c.zoomout_start},
              {"zoomout_max", c.zoomout_max},
              {"zoomout_steps", c.zoomout_steps},
              {"lambda_comm", c.lambda_comm},
              {"lambda_tik", c.lambda_tik},
              {"probe_smoothing", c.probe_smoothing},
              {"hks_num_scales", c.hks_num_scales},
              {"recall_cutoffs", c.recall_cutoffs},
              {"captions_per_image", c.captions_per_image},
              {"cca_ridge", c.cca_ridge},
              {"procrustes_center", c.procrustes_center},
              {"truncation", truncation_name(c.truncation)},
              {"seed", c.seed}};
}

PipelineConfig config_from_json(const Json& j) {
  try {
    PipelineConfig c;
    c.knn_k = j.at("knn_k").get<int>();
    c.spectral_dim = j.at("spectral_dim").get<int>();
    c.zoomout = j.at("zoomout").get<bool>();
    c.zoomout_start = j.at("zoomout_start").get<int>();
    c.zoomout_max = j.at("zoomout_max").get<int>();
    c.zoomout_steps = j.at("zoomout_steps").get<int>();
    c.lambda_comm = j.at("lambda_comm").get<double>();
    c.lambda_tik = j.at("lambda_tik").get<double>();
    c.probe_smoothing = j.at("probe_smoothing").get<double>();
    c.hks_num_scales = j.at("hks_num_scales").get<int>();
    c.recall_cutoffs = j.at("recall_cutoffs").get<std::vector<int>>();
    c.captions_per_image = j.at("captions_per_image").get<int>();
    c.cca_ridge = j.at("cca_ridge").get<double>();
    c.procrustes_center = j.at("procrustes_center").get<bool>();
    c.truncation = truncation_from_name(j.at("truncation").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid config JSON: ") + e.what());
  }
}

Json to_json(const DiagnosticsReport& r) {
  std::vector<double> rho(r.diag_dominance.data(), r.diag_dominance.data() + r.diag_dominance.size());
  std::vector<Eigen::Index> degenerate = r.degenerate_indices;
  return Json{{"spectral_distance", r.spectral_distance},
              {"diag_dominance_mean", r.diag_dominance_mean},
              {"orthogonality_error", r.orthogonality_error},
              {"commutativity_error", r.commutativity_error},
              {"diag_dominance", rho},
              {"eigenvalue_range_source", {r.source_eigenvalue_range.first, r.source_eigenvalue_range.second}},
              {"eigenvalue_range_target", {r.target_eigenvalue_range.first, r.target_eigenvalue_range.second}},
              {"degenerate_indices", degenerate}};
}

DiagnosticsReport diagnostics_from_json(const Json& j) {
  try {
    DiagnosticsReport r;
    r.spectral_distance = j.at("spectral_distance").get<double>();
    r.diag_dominance_mean = j.at("diag_dominance_mean").get<double>();
    r.orthogonality_error = j.at("orthogonality_error").get<double>();
    r.commutativity_error = j.at("commutativity_error").get<double>();
    const auto rho = j.at("diag_dominance").get<std::vector<double>>();
    r.diag_dominance = Eigen::Map<const Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size()));
    const auto src = j.at("eigenvalue_range_source").get<std::vector<double>>();
    const auto tgt = j.at("eigenvalue_range_target").get<std::vector<double>>();
    if (src.size() != 2 || tgt.size() != 2) throw FormatError("eigenvalue ranges must have two entries");
    r.source_eigenvalue_range = {src[0], src[1]};
    r.target_eigenvalue_range = {tgt[0], tgt[1]};
    r.degenerate_indices = j.at("degenerate_indices").get<std::vector<Eigen::Index>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid diagnostics JSON: ") + e.what());
  }
}

Json to_json(const RecallTable& table) {
  Json j{{"protocol", to_string(table.protocol())}, {"i2t", Json::object()}, {"t2i", Json::object()}};
  for (const auto& e : table.entries()) j[to_string(e.direction)][cutoff_key(e.k)] = e.recall;
  return j;
}

RecallTable recall_from_json(const Json& j) {
  try {
    RecallTable table(protocol_from_string(j.at("protocol").get<std::string>()));
    for (const auto direction : {Direction::i2t, Direction::t2i}) {
      const auto key = to_string(direction);
      if (!j.contains(key)) continue;
      for (const auto& [name, value] : j.at(key).items()) {
        if (name.rfind("R@", 0) != 0) throw FormatError("bad recall key '" + name + "'");
        table.set(direction, std::stoi(name.substr(2)), value.get<double>());
      }
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid recall JSON: ") + e.what());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move report into place at " + path.string());
  }
}

void write_json_atomic(const std::filesystem::path& path, const Json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_report(const DiagnosticsReport& report, const PipelineConfig& config, const std::filesystem::path& path) {
  write_json_atomic(path, Json{{"config", to_json(config)}, {"diagnostics", to_json(report)}});
}

void write_report(const RecallTable& table, const PipelineConfig& config, const std::filesystem::path& path) {
  write_json_atomic(path, Json{{"config", to_json(config)}, {"recall", to_json(table)}});
}

}  // namespace fmapdiag
