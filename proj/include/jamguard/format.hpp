#pragma once

#include <string>
#include <string_view>

namespace jamguard {

/// Canonical text form of a double: 12 significant digits, `.` decimal point,
/// shortest representation. Used for every CSV and report value.
std::string format_double(double value);

/// Rounds to the value that format_double would print.
double canonical(double value);

/// 64-bit FNV-1a digest as lowercase hex; used for provenance fields.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace jamguard
