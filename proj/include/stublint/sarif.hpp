#pragma once

#include "stublint/diagnostic.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace stublint {

inline constexpr std::string_view tool_version = "0.3.0";

/// `uri-reference` form of a file path: unreserved characters and `/` are
/// kept, everything else is percent-encoded.
std::string path_to_uri(std::string_view path);

/// Single-run SARIF 2.1.0 log. Results appear in the order given; callers
/// sort first.
std::string emit_sarif(const std::vector<Diagnostic>& diags);

} // namespace stublint
