#pragma once

#include <string_view>

namespace d4c::detail {

// Files under assets/, compiled in at build time. Keyed by path relative to assets/.
// Throws std::out_of_range for unknown names.
std::string_view embedded_asset(std::string_view name);

}  // namespace d4c::detail
