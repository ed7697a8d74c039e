#pragma once

#include <string>

namespace voltvar {

std::string read_text_file(const std::string& path);

/// Writes to a temp file in the same directory, then renames into place, so
/// readers never observe a partially written file.
void atomic_write_file(const std::string& path, const std::string& content);

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

} // namespace voltvar
