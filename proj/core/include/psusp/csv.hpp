#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace psusp::csv {

/// Reals are written with 17 significant digits so they round-trip exactly.
inline std::string real(double v) { return fmt::format("{:.17g}", v); }

inline void row(std::ostream& os, std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (auto c : cells) {
        if (!first) os << ',';
        os << c;
        first = false;
    }
    os << '\n';
}

}  // namespace psusp::csv
