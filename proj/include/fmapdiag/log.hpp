#pragma once

#include <functional>
#include <string>

namespace fmapdiag {

using WarningSink = std::function<void(const std::string&)>;

/// Emit a non-fatal warning. Defaults to stderr.
void warn(const std::string& message);

/// Replace the warning sink; returns the previous one. Passing an empty
/// function restores the stderr default.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace fmapdiag
