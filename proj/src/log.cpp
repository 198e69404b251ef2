#include "fmapdiag/log.hpp"

#include <iostream>
#include <utility>

namespace fmapdiag {
namespace {

WarningSink& sink() {
  static WarningSink s;
  return s;
}

}  // namespace

void warn(const std::string& message) {
  if (sink()) {
    sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink s) { return std::exchange(sink(), std::move(s)); }

}  // namespace fmapdiag
