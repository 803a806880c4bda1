#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "hubsim/errors.hpp"

namespace hubsim {

// shortest round-trip representation, locale-independent, '.' decimal
inline std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, p);
}

// binary mode so line endings are LF everywhere
inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace hubsim
