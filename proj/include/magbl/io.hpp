#pragma once
/// Deterministic text output helpers.

#include "magbl/common.hpp"

#include <filesystem>
#include <string>

namespace magbl {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Writes text to a file, creating parent directories; throws on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace magbl
