#include "pickact/kde.hpp"

#include "pickact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

namespace pickact {

namespace {

constexpr int kNewtonCap = 50;

std::string label(const std::string& attribute) {
    return attribute.empty() ? std::string("attribute") : "attribute '" + attribute + "'";
}

// cos(pi * m / (2n)) for m in [0, 4n): the only angles a length-n DCT-II needs.
class CosTable {
public:
    explicit CosTable(int n) : n_(n), table_(4 * static_cast<std::size_t>(n)) {
        for (std::size_t m = 0; m < table_.size(); ++m)
            table_[m] = std::cos(std::numbers::pi * static_cast<double>(m) / (2.0 * n));
    }
    // cos(pi * k * (2j+1) / (2n))
    double operator()(long k, long j) const { return table_[static_cast<std::size_t>((k * (2 * j + 1)) % (4L * n_))]; }

private:
    int n_;
    std::vector<double> table_;
};

// a_0 = sum x_j, a_k = 2 sum x_j cos(pi k (2j+1) / 2n).
std::vector<double> dct_weighted(const std::vector<double>& x, const CosTable& cs) {
    const long n = static_cast<long>(x.size());
    std::vector<double> a(x.size(), 0.0);
    std::vector<long> nonzero;
    for (long j = 0; j < n; ++j)
        if (x[j] != 0.0)
            nonzero.push_back(j);
    for (long k = 0; k < n; ++k) {
        double s = 0.0;
        for (long j : nonzero)
            s += x[j] * cs(k, j);
        a[k] = k == 0 ? s : 2.0 * s;
    }
    return a;
}

// y_j = sum_k a_k cos(pi k (2j+1) / 2n)  (n times the inverse of dct_weighted).
std::vector<double> idct_weighted(const std::vector<double>& a, const CosTable& cs) {
    const long n = static_cast<long>(a.size());
    long last = n - 1;
    while (last > 0 && a[last] == 0.0)
        --last;
    std::vector<double> y(a.size(), 0.0);
    for (long j = 0; j < n; ++j) {
        double s = 0.0;
        for (long k = 0; k <= last; ++k)
            s += a[k] * cs(k, j);
        y[j] = s;
    }
    return y;
}

// t - xi * gamma^[l](t) with l = 7 stages of plug-in functional estimation.
double fixed_point(double t, double n_samples, const std::vector<double>& i_sq, const std::vector<double>& a2) {
    constexpr int l = 7;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    auto functional = [&](int s, double time) {
        double sum = 0.0;
        for (std::size_t k = 0; k < i_sq.size(); ++k)
            sum += std::pow(i_sq[k], s) * a2[k] * std::exp(-i_sq[k] * pi2 * time);
        return 2.0 * std::pow(std::numbers::pi, 2 * s) * sum;
    };
    double f = functional(l, t);
    for (int s = l - 1; s >= 2; --s) {
        double k0 = 1.0;
        for (int odd = 1; odd <= 2 * s - 1; odd += 2)
            k0 *= odd;
        k0 /= std::sqrt(2.0 * std::numbers::pi);
        const double c = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
        const double time = std::pow(2.0 * c * k0 / n_samples / f, 2.0 / (3.0 + 2.0 * s));
        f = functional(s, time);
    }
    return t - std::pow(2.0 * n_samples * std::sqrt(std::numbers::pi) * f, -0.4);
}

// Root of fixed_point inside (0, hi]: bracket by doubling, then safeguarded
// Newton (secant derivative, bisection fallback), at most kNewtonCap steps.
std::optional<double> solve_diffusion_time(double n_samples, const std::vector<double>& i_sq,
                                           const std::vector<double>& a2) {
    auto g = [&](double t) { return fixed_point(t, n_samples, i_sq, a2); };
    const double n_eff = std::clamp(n_samples, 50.0, 1050.0);
    double hi = 1e-12 + 0.01 * (n_eff - 50.0) / 1000.0;
    double lo = 0.0;
    double g_lo = g(lo);
    double g_hi = g(hi);
    while (!(std::isfinite(g_hi) && g_hi > 0.0)) {
        if (hi >= 0.1)
            return std::nullopt;
        hi = std::min(2.0 * hi, 0.1);
        g_hi = g(hi);
    }
    if (!(g_lo < 0.0))
        return std::nullopt;

    double t = 0.5 * (lo + hi);
    for (int it = 0; it < kNewtonCap; ++it) {
        const double gt = g(t);
        if (!std::isfinite(gt))
            return std::nullopt;
        if (gt == 0.0)
            return t;
        if (gt < 0.0)
            lo = t;
        else
            hi = t;
        const double h = std::max(1e-9 * t, 1e-300);
        const double slope = (g(t + h) - gt) / h;
        double next = slope > 0.0 && std::isfinite(slope) ? t - gt / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-12 * t || hi - lo <= 1e-14 * hi)
            return next;
        t = next;
    }
    return std::nullopt;
}

double sample_std(std::span<const double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile_sorted(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < s.size() ? s[i] * (1.0 - frac) + s[i + 1] * frac : s[i];
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double sd = sample_std(s);
    const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
}

std::vector<double> find_modes(std::span<const double> grid, std::span<const double> density, double rel_floor) {
    std::vector<double> modes;
    if (density.size() < 3)
        return modes;
    const double peak = *std::max_element(density.begin(), density.end());
    for (std::size_t j = 1; j + 1 < density.size(); ++j) {
        if (density[j] > density[j - 1] && density[j] > density[j + 1] && density[j] >= rel_floor * peak)
            modes.push_back(grid[j]);
    }
    return modes;
}

double trapezoid(std::span<const double> grid, std::span<const double> values) {
    double s = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j)
        s += 0.5 * (values[j] + values[j - 1]) * (grid[j] - grid[j - 1]);
    return s;
}

KdeModel fit_kde(std::span<const double> samples, const std::string& attribute) {
    if (samples.size() < kKdeMinSamples)
        throw CalibrationError(label(attribute) + ": KDE needs at least 10 samples, got " +
                               std::to_string(samples.size()));
    for (double v : samples)
        if (!std::isfinite(v))
            throw CalibrationError(label(attribute) + ": non-finite sample");
    const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn))
        throw CalibrationError(label(attribute) + ": zero variance");

    const double sd = sample_std(samples);
    const int n = kKdeGridSize;
    const double lo = mn - 3.0 * sd;
    const double hi = mx + 3.0 * sd;
    const double range = hi - lo;
    const double step = range / (n - 1);

    KdeModel model;
    model.attribute = attribute;
    model.grid.resize(n);
    for (int j = 0; j < n; ++j)
        model.grid[j] = lo + j * step;

    std::vector<double> hist(n, 0.0);
    for (double v : samples) {
        const int bin = std::clamp(static_cast<int>((v - lo) / step), 0, n - 1);
        hist[bin] += 1.0;
    }
    const double n_samples = static_cast<double>(samples.size());
    for (double& h : hist)
        h /= n_samples;

    const CosTable cs(n);
    const std::vector<double> a = dct_weighted(hist, cs);
    std::vector<double> i_sq(n - 1), a2(n - 1);
    for (int k = 1; k < n; ++k) {
        i_sq[k - 1] = static_cast<double>(k) * k;
        a2[k - 1] = 0.25 * a[k] * a[k];
    }

    double t_star;
    if (const auto t = solve_diffusion_time(n_samples, i_sq, a2); t && *t > 0.0) {
        t_star = *t;
        model.bandwidth = std::sqrt(t_star) * range;
    } else {
        model.bandwidth = silverman_bandwidth(samples);
        model.bandwidth_fallback = true;
        t_star = (model.bandwidth / range) * (model.bandwidth / range);
    }

    std::vector<double> smoothed(n);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int k = 0; k < n; ++k)
        smoothed[k] = a[k] * std::exp(-static_cast<double>(k) * k * pi2 * t_star / 2.0);
    model.density = idct_weighted(smoothed, cs);
    for (double& d : model.density)
        d = std::max(d / range, 0.0);

    model.modes = find_modes(model.grid, model.density);
    return model;
}

}  // namespace pickact
