#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <vector>

#include "personae/error.hpp"
#include "personae/physics/diffraction.hpp"

namespace personae::physics {

/// n evenly spaced values from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
    v[n - 1] = hi;
    return v;
}

struct AxisRange {
    double min = -10.0;
    double max = 10.0;
    std::size_t count = 500;
};

/// P sampled over (delay, frequency). values[i][j] belongs to
/// frequencies[i] and delays[j]; delay means t1 - t2.
struct DiffractionGrid {
    std::vector<double> delays;
    std::vector<double> frequencies;
    std::vector<std::vector<double>> values;
    SlitConfig config;

    /// The configuration evaluated at one delay: t1 = 0, t2 = -delay.
    SlitConfig config_at(double delay) const {
        SlitConfig c = config;
        c.t1 = 0.0;
        c.t2 = -delay;
        return c;
    }

    std::size_t nearest_delay_index(double delay) const { return nearest(delays, delay); }
    std::size_t nearest_frequency_index(double omega) const { return nearest(frequencies, omega); }

private:
    static std::size_t nearest(const std::vector<double>& axis, double v) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (std::abs(axis[i] - v) < std::abs(axis[best] - v)) best = i;
        return best;
    }
};

/// Evaluates the finite-slit probability at every (frequency, delay) node.
/// Rows may be split across `workers` threads; the result does not depend
/// on the split.
inline DiffractionGrid evaluate_grid(const SlitConfig& base, AxisRange delay, AxisRange frequency,
                                     unsigned workers = 1) {
    if (delay.count < 2 || frequency.count < 2) throw InvalidRange("grid axes need at least 2 points");
    if (!(delay.min < delay.max) || !(frequency.min < frequency.max))
        throw InvalidRange("grid axis minimum must be below maximum");
    if (!base.valid()) throw InvalidRange("slit configuration has negative durations or non-finite fields");

    DiffractionGrid g;
    g.config = base;
    g.delays = linspace(delay.min, delay.max, delay.count);
    g.frequencies = linspace(frequency.min, frequency.max, frequency.count);
    g.values.assign(g.frequencies.size(), std::vector<double>(g.delays.size()));

    std::vector<SlitConfig> columns;
    columns.reserve(g.delays.size());
    for (double d : g.delays) columns.push_back(g.config_at(d));

    auto fill_rows = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < g.delays.size(); ++j)
                g.values[i][j] = finite_slit_probability(base.x, g.frequencies[i], columns[j]);
    };

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(g.frequencies.size())));
    if (workers == 1) {
        fill_rows(0, g.frequencies.size());
    } else {
        std::vector<std::future<void>> parts;
        const std::size_t chunk = (g.frequencies.size() + workers - 1) / workers;
        for (std::size_t begin = 0; begin < g.frequencies.size(); begin += chunk)
            parts.push_back(std::async(std::launch::async, fill_rows, begin,
                                       std::min(begin + chunk, g.frequencies.size())));
        for (auto& p : parts) p.get();
    }
    return g;
}

/// Mean spacing along frequency between adjacent interference maxima in the
/// column nearest `delay`. Only maxima inside the central half of the
/// frequency range count, away from the sinc envelope's edges.
inline double fringe_spacing(const DiffractionGrid& grid, double delay) {
    if (grid.delays.empty() || grid.frequencies.size() < 3) throw InvalidRange("grid too small");
    if (delay < grid.delays.front() || delay > grid.delays.back())
        throw InvalidRange("delay outside the grid");
    if (delay == 0.0) throw InvalidRange("fringes need a nonzero delay");

    const std::size_t col = grid.nearest_delay_index(delay);
    const double lo = grid.frequencies.front();
    const double hi = grid.frequencies.back();
    const double quarter = (hi - lo) / 4.0;
    const double window_lo = lo + quarter;
    const double window_hi = hi - quarter;

    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < grid.frequencies.size(); ++i) {
        const double w = grid.frequencies[i];
        if (w < window_lo || w > window_hi) continue;
        const double p = grid.values[i][col];
        if (p > grid.values[i - 1][col] && p >= grid.values[i + 1][col]) maxima.push_back(w);
    }
    if (maxima.size() < 2)
        throw TooFewMaxima("found " + std::to_string(maxima.size()) + " maxima in the central window");
    return (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
}

} // namespace personae::physics
