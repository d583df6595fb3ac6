#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pickact {

struct KMeansOptions {
    std::uint64_t seed = 42;
    int restarts = 20;
    int max_iterations = 300;
    double tolerance = 1e-6;  // largest center shift that counts as converged
};

struct ClusterModel {
    std::string attribute;
    int k = 0;
    std::vector<double> centers;  // strictly increasing
    double silhouette = 0.0;      // mean coefficient, in [-1, 1]
    std::vector<int> assignments; // index into centers, per sample
    double inertia = 0.0;
    bool degenerate = false;      // k equals the number of distinct values
};

/// 1-D k-means (k-means++ seeding, best inertia over restarts) scored by the
/// mean silhouette coefficient. Throws CalibrationError when the samples hold
/// fewer distinct values than k.
ClusterModel kmeans_silhouette(std::span<const double> samples, int k, const std::string& attribute = "",
                               const KMeansOptions& opts = {});

/// Mean silhouette over all samples; members of singleton clusters score 0.
double silhouette_score(std::span<const double> samples, std::span<const int> labels, int k);

}  // namespace pickact
