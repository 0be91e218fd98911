#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>

namespace nlrd {

// Shortest-safe round-trip text for a double: 17 significant digits, '.' decimal.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_row(std::ostream& os, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) os << ',';
        os << format_real(v);
        first = false;
    }
    os << '\n';
}

}  // namespace nlrd
