#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace tabeval {

// Shared diagnostics logger; writes to stderr.
spdlog::logger& log();

}  // namespace tabeval
