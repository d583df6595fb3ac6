#include "pickact/kmeans.hpp"

#include "pickact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace pickact {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int nearest(double x, const std::vector<double>& centers) {
    int best = 0;
    double best_d = std::abs(x - centers[0]);
    for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
        const double d = std::abs(x - centers[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<double> seed_plus_plus(std::span<const double> x, int k, std::mt19937_64& rng) {
    std::vector<double> centers;
    const std::size_t n = x.size();
    centers.push_back(x[std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n))]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers)
                best = std::min(best, (x[i] - c) * (x[i] - c));
            d2[i] = best;
            total += best;
        }
        double target = uniform01(rng) * total;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0)
                continue;
            pick = i;
            target -= d2[i];
            if (target < 0.0)
                break;
        }
        centers.push_back(x[pick]);
    }
    return centers;
}

struct LloydResult {
    std::vector<double> centers;
    std::vector<int> labels;
    double inertia = 0.0;
};

LloydResult lloyd(std::span<const double> x, std::vector<double> centers, const KMeansOptions& opts) {
    const int k = static_cast<int>(centers.size());
    std::vector<int> labels(x.size(), 0);
    for (int it = 0; it < opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < x.size(); ++i)
            labels[i] = nearest(x[i], centers);
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum[labels[i]] += x[i];
            ++count[labels[i]];
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            double next = centers[c];
            if (count[c] > 0) {
                next = sum[c] / static_cast<double>(count[c]);
            } else {
                // Re-seed an empty cluster on the worst-fitted sample.
                double worst = -1.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double d = std::abs(x[i] - centers[labels[i]]);
                    if (d > worst) {
                        worst = d;
                        next = x[i];
                    }
                }
            }
            shift = std::max(shift, std::abs(next - centers[c]));
            centers[c] = next;
        }
        if (shift < opts.tolerance)
            break;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        labels[i] = nearest(x[i], centers);
    LloydResult r{centers, labels, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i)
        r.inertia += (x[i] - centers[labels[i]]) * (x[i] - centers[labels[i]]);
    return r;
}

}  // namespace

double silhouette_score(std::span<const double> samples, std::span<const int> labels, int k) {
    if (samples.empty())
        return 0.0;
    // Sorted members and prefix sums per cluster give each mean distance in O(log n).
    std::vector<std::vector<double>> members(k);
    for (std::size_t i = 0; i < samples.size(); ++i)
        members[labels[i]].push_back(samples[i]);
    std::vector<std::vector<double>> prefix(k);
    for (int c = 0; c < k; ++c) {
        std::sort(members[c].begin(), members[c].end());
        prefix[c].assign(members[c].size() + 1, 0.0);
        for (std::size_t j = 0; j < members[c].size(); ++j)
            prefix[c][j + 1] = prefix[c][j] + members[c][j];
    }
    auto distance_sum = [&](int c, double x) {
        const auto& m = members[c];
        const std::size_t below = static_cast<std::size_t>(std::upper_bound(m.begin(), m.end(), x) - m.begin());
        const double sum_below = prefix[c][below];
        const double sum_above = prefix[c].back() - sum_below;
        return x * static_cast<double>(below) - sum_below + sum_above - x * static_cast<double>(m.size() - below);
    };

    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int own = labels[i];
        const std::size_t own_size = members[own].size();
        if (own_size <= 1)
            continue;
        const double a = distance_sum(own, samples[i]) / static_cast<double>(own_size - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || members[c].empty())
                continue;
            b = std::min(b, distance_sum(c, samples[i]) / static_cast<double>(members[c].size()));
        }
        if (!std::isfinite(b))
            continue;
        const double denom = std::max(a, b);
        if (denom > 0.0)
            total += (b - a) / denom;
    }
    return std::clamp(total / static_cast<double>(samples.size()), -1.0, 1.0);
}

ClusterModel kmeans_silhouette(std::span<const double> samples, int k, const std::string& attribute,
                               const KMeansOptions& opts) {
    const std::string who = attribute.empty() ? std::string("k-means") : "attribute '" + attribute + "'";
    if (k < 1)
        throw CalibrationError(who + ": k must be >= 1");
    for (double v : samples)
        if (!std::isfinite(v))
            throw CalibrationError(who + ": non-finite sample");
    std::vector<double> distinct(samples.begin(), samples.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<int>(distinct.size()) < k)
        throw CalibrationError(who + ": only " + std::to_string(distinct.size()) + " distinct values for k=" +
                               std::to_string(k) + " (degenerate clusters)");

    std::mt19937_64 rng(opts.seed);
    LloydResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        LloydResult run = lloyd(samples, seed_plus_plus(samples, k, rng), opts);
        if (run.inertia < best.inertia)
            best = std::move(run);
    }

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return best.centers[a] < best.centers[b]; });
    std::vector<int> rank(k);
    for (int i = 0; i < k; ++i)
        rank[order[i]] = i;

    ClusterModel m;
    m.attribute = attribute;
    m.k = k;
    m.inertia = best.inertia;
    m.degenerate = static_cast<int>(distinct.size()) == k;
    for (int i = 0; i < k; ++i)
        m.centers.push_back(best.centers[order[i]]);
    m.assignments.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        m.assignments[i] = rank[best.labels[i]];
    m.silhouette = silhouette_score(samples, m.assignments, k);
    return m;
}

}  // namespace pickact
