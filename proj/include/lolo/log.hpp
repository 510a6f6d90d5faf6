#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace lolo {

/// Shared stderr logger. Level comes from LOLO_DCV_LOG
/// (trace|debug|info|warn|error|off; default warn).
spdlog::logger& log();

}  // namespace lolo
