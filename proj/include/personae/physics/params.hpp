#pragma once

#include <charconv>
#include <map>
#include <stdexcept>
#include <string>

#include "personae/physics/grid.hpp"

namespace personae::physics {

/// Everything needed to evaluate one grid. Defaults reproduce the reference
/// plot: unit amplitudes and durations, k = 2pi, x = 0, both axes -10..10
/// with 500 points.
struct GridRequest {
    SlitConfig slit;
    AxisRange delay{-10.0, 10.0, 500};
    AxisRange frequency{-10.0, 10.0, 500};
};

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for " + what + ": '" + s + "'");
    }
}

/// "min:max:count", e.g. "-10:10:500".
inline AxisRange parse_axis_range(const std::string& s) {
    auto first = s.find(':');
    auto second = first == std::string::npos ? std::string::npos : s.find(':', first + 1);
    if (second == std::string::npos) throw std::invalid_argument("range must look like min:max:count, got '" + s + "'");
    AxisRange r;
    r.min = parse_double(s.substr(0, first), "range minimum");
    r.max = parse_double(s.substr(first + 1, second - first - 1), "range maximum");
    const auto count = s.substr(second + 1);
    long n = 0;
    auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (ec != std::errc{} || end != count.data() + count.size() || n < 0)
        throw std::invalid_argument("bad point count in range '" + s + "'");
    r.count = static_cast<std::size_t>(n);
    return r;
}

inline std::string format_axis_range(const AxisRange& r) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g:%.17g:%zu", r.min, r.max, r.count);
    return buf;
}

/// Applies named overrides (A1, A2, T1, T2, k, x, delay_range, freq_range)
/// to the defaults. Unknown keys are rejected.
inline GridRequest grid_request_from(const std::map<std::string, std::string>& params) {
    GridRequest g;
    for (const auto& [key, value] : params) {
        if (key == "A1") g.slit.a1 = parse_double(value, key);
        else if (key == "A2") g.slit.a2 = parse_double(value, key);
        else if (key == "T1") g.slit.duration1 = parse_double(value, key);
        else if (key == "T2") g.slit.duration2 = parse_double(value, key);
        else if (key == "k") g.slit.wavenumber = parse_double(value, key);
        else if (key == "x") g.slit.x = parse_double(value, key);
        else if (key == "delay_range" || key == "delay-range") g.delay = parse_axis_range(value);
        else if (key == "freq_range" || key == "freq-range") g.frequency = parse_axis_range(value);
        else throw std::invalid_argument("unknown grid parameter '" + key + "'");
    }
    return g;
}

inline DiffractionGrid evaluate(const GridRequest& g, unsigned workers = 1) {
    return evaluate_grid(g.slit, g.delay, g.frequency, workers);
}

} // namespace personae::physics
