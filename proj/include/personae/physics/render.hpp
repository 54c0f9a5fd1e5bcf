#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include "personae/physics/grid.hpp"
#include "personae/util/files.hpp"

namespace personae::physics {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Matrix text: the delay axis, then the frequency axis, then one row of
/// values per frequency. Comma separated, 17 significant digits, '\n' ends
/// every line.
inline std::string matrix_text(const DiffractionGrid& grid) {
    std::string out;
    auto row = [&out](const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out += ',';
            out += format_g17(values[i]);
        }
        out += '\n';
    };
    row(grid.delays);
    row(grid.frequencies);
    for (const auto& r : grid.values) row(r);
    return out;
}

using Rgb = std::array<std::uint8_t, 3>;

// Dark purple -> blue -> teal -> green -> yellow; luminance rises at every stop.
inline constexpr std::array<Rgb, 5> kRampStops = {{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
}};

/// Color for t in [0, 1], piecewise-linear between the ramp stops.
inline Rgb ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * static_cast<double>(kRampStops.size() - 1);
    const auto lo = std::min<std::size_t>(static_cast<std::size_t>(pos), kRampStops.size() - 2);
    const double f = pos - static_cast<double>(lo);
    Rgb c{};
    for (std::size_t k = 0; k < 3; ++k) {
        const double v = kRampStops[lo][k] + f * (kRampStops[lo + 1][k] - kRampStops[lo][k]);
        c[k] = static_cast<std::uint8_t>(std::lround(v));
    }
    return c;
}

/// Binary PPM (P6) heatmap, delay increasing to the right and frequency
/// increasing upwards. Values are scaled by the grid maximum.
inline std::string heatmap_ppm(const DiffractionGrid& grid) {
    const std::size_t width = grid.delays.size();
    const std::size_t height = grid.frequencies.size();
    double peak = 0.0;
    for (const auto& r : grid.values)
        for (double v : r) peak = std::max(peak, v);

    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.reserve(out.size() + width * height * 3);
    for (std::size_t row = 0; row < height; ++row) {
        const auto& values = grid.values[height - 1 - row];
        for (std::size_t col = 0; col < width; ++col) {
            auto c = ramp_color(peak > 0 ? values[col] / peak : 0.0);
            out.append(reinterpret_cast<const char*>(c.data()), 3);
        }
    }
    return out;
}

struct RenderPaths {
    std::filesystem::path matrix;  // empty: skip
    std::filesystem::path image;   // empty: skip
};

inline void render_outputs(const DiffractionGrid& grid, const RenderPaths& paths) {
    if (grid.values.size() != grid.frequencies.size()) throw IoFailure("grid rows do not match frequency axis");
    if (!paths.matrix.empty()) files::write_atomic(paths.matrix, matrix_text(grid));
    if (!paths.image.empty()) files::write_atomic(paths.image, heatmap_ppm(grid));
}

} // namespace personae::physics
