#pragma once

#include <string>

#include <json.hpp>

#include "tdelay/config.hpp"

namespace tdelay {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidationFailed = 1, kExitConfigError = 2, kExitNumericalFailure = 3 };

/// 12 significant digits, "nan" for NaN.
std::string format_number(double value);

/// One row per grid energy; header names carry units.
std::string spectrum_csv(const RunConfig& config);

/// One row per displacement at the configured energy (default 2 eV).
std::string shift_scan_csv(const RunConfig& config);

nlohmann::json symmetry_report(const RunConfig& config);

/// Invariant suite over every configured potential (default V1..V6). "passed" is true iff every
/// check passed; numerical failures are recorded as failed checks with their message.
nlohmann::json validation_report(const RunConfig& config);

}  // namespace tdelay
