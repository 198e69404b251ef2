#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fmapdiag/dataio.hpp"
#include "fmapdiag/diagnostics.hpp"
#include "fmapdiag/retrieval.hpp"

namespace fmapdiag {

using Json = nlohmann::ordered_json;

Json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const Json& j);

Json to_json(const DiagnosticsReport& report);
DiagnosticsReport diagnostics_from_json(const Json& j);

/// {"protocol": ..., "i2t": {"R@1": ...}, "t2i": {...}}
Json to_json(const RecallTable& table);
RecallTable recall_from_json(const Json& j);

/// Writes to a temporary sibling and renames it into place, so readers
/// never observe a partial file. Throws IoError.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_atomic(const std::filesystem::path& path, const Json& j);

Json read_json(const std::filesystem::path& path);

/// {"config": ..., "diagnostics": ...}
void write_report(const DiagnosticsReport& report, const PipelineConfig& config, const std::filesystem::path& path);
/// {"config": ..., "recall": ...}
void write_report(const RecallTable& table, const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace fmapdiag
