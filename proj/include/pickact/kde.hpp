#pragma once

#include <span>
#include <string>
#include <vector>

namespace pickact {

/// Gaussian KDE whose bandwidth comes from the linear-diffusion fixed point
/// (histogram on a 2^12 grid, DCT, solve t = xi * gamma(t)).
struct KdeModel {
    std::string attribute;
    std::vector<double> grid;     // uniform, ascending
    std::vector<double> density;  // >= 0, same length as grid
    double bandwidth = 0.0;
    std::vector<double> modes;    // grid locations of local maxima above 1% of the peak
    bool bandwidth_fallback = false;  // fixed point failed; Silverman's rule was used
};

inline constexpr int kKdeGridSize = 1 << 12;
inline constexpr std::size_t kKdeMinSamples = 10;

/// Throws CalibrationError (naming `attribute`) on fewer than 10 samples,
/// non-finite values or zero variance.
KdeModel fit_kde(std::span<const double> samples, const std::string& attribute = "");

double silverman_bandwidth(std::span<const double> samples);

/// Strict interior local maxima of `density` at or above rel_floor * peak.
std::vector<double> find_modes(std::span<const double> grid, std::span<const double> density, double rel_floor = 0.01);

double trapezoid(std::span<const double> grid, std::span<const double> values);

}  // namespace pickact
