#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace presslens {

/// Shared stderr logger. Level comes from PRESSLENS_LOG (trace, debug, info,
/// warn, error, off); the default is warn.
std::shared_ptr<spdlog::logger> log();

}  // namespace presslens
