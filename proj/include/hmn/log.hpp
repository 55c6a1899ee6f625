#pragma once

#include <spdlog/spdlog.h>

namespace hmn {

/// Sets the global log level from HMN_LOG={error,info,debug} (default info).
void init_logging();

}  // namespace hmn
