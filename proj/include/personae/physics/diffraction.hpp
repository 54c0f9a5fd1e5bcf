#pragma once

#include <cmath>
#include <numbers>

namespace personae::physics {

/// Unnormalized sinc, sin(u)/u, with sinc(0) = 1. Below |u| = 1e-4 the
/// Taylor polynomial 1 - u^2/6 + u^4/120 is used; its truncation error there
/// is under 1e-23.
inline double sinc(double u) {
    if (std::abs(u) < 1e-4) {
        const double u2 = u * u;
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
    }
    return std::sin(u) / u;
}

/// Two instantaneous openings of one slit at t1 and t2:
/// A1^2 + A2^2 + 2 A1 A2 cos(omega (t2 - t1)).
inline double delta_slit_probability(double a1, double a2, double omega, double t1, double t2) {
    return a1 * a1 + a2 * a2 + 2.0 * a1 * a2 * std::cos(omega * (t2 - t1));
}

/// Parameters of a double slit in time. Opening i has amplitude a_i, opens
/// at t_i and stays open for duration_i.
struct SlitConfig {
    double a1 = 1.0;
    double a2 = 1.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double duration1 = 1.0;
    double duration2 = 1.0;
    double wavenumber = 2.0 * std::numbers::pi;
    double x = 0.0;

    bool valid() const {
        return duration1 >= 0.0 && duration2 >= 0.0 && std::isfinite(a1) && std::isfinite(a2) &&
               std::isfinite(t1) && std::isfinite(t2) && std::isfinite(duration1) && std::isfinite(duration2) &&
               std::isfinite(wavenumber) && std::isfinite(x);
    }

    /// The same configuration with the two openings exchanged.
    SlitConfig swapped() const {
        SlitConfig s = *this;
        std::swap(s.a1, s.a2);
        std::swap(s.t1, s.t2);
        std::swap(s.duration1, s.duration2);
        return s;
    }
};

/// Finite-duration openings, in the frequency domain:
///   a^2 + b^2 + 2ab cos(2kx - omega (t1 - t2)),
/// with a = A1 sinc(omega T1 / 2) and b = A2 sinc(omega T2 / 2).
///
/// Evaluated as (a+b)^2 cos^2(phase/2) + (a-b)^2 sin^2(phase/2), the same
/// quantity written as a sum of squares, so rounding cannot push it below 0.
inline double finite_slit_probability(double x, double omega, const SlitConfig& cfg) {
    const double a = cfg.a1 * sinc(omega * cfg.duration1 / 2.0);
    const double b = cfg.a2 * sinc(omega * cfg.duration2 / 2.0);
    const double half_phase = (2.0 * cfg.wavenumber * x - omega * (cfg.t1 - cfg.t2)) / 2.0;
    const double c = std::cos(half_phase);
    const double s = std::sin(half_phase);
    const double sum = a + b;
    const double diff = a - b;
    return sum * sum * c * c + diff * diff * s * s;
}

} // namespace personae::physics
