#pragma once

// k-means with k-means++ seeding, elbow selection, cluster validity indices,
// and the method x k evaluation grid.

#include "custseg/features.hpp"
#include "custseg/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace custseg {

struct KMeansOptions {
    std::size_t max_iterations = 300;
    unsigned threads = 1;
};

struct KMeansModel {
    std::size_t k = 0;
    Matrix centroids;                    // k x D
    std::vector<std::size_t> assignments;
    double inertia = 0.0;                // sum of squared distances to assigned centroids
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> inertia_history; // after each assignment step
};

/// Lloyd iterations from k-means++ seeds until the assignment is a fixpoint
/// or `max_iterations` is reached. An emptied cluster is reseeded with the
/// point farthest from its own centroid. Requires 1 <= k <= N.
KMeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

/// Lowest-inertia model over `restarts` seeds derived from `seed`.
KMeansModel kmeans_fit_best(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts,
                            const KMeansOptions& options = {});

/// Mean silhouette over points; points in singleton clusters score 0.
/// Euclidean distance. Throws MetricError for fewer than two clusters.
double silhouette(const Matrix& x, const std::vector<std::size_t>& assignments);

/// Davies-Bouldin index with S_i the mean distance to the centroid.
/// Throws MetricError naming the pair when two centroids coincide.
double davies_bouldin(const Matrix& x, const std::vector<std::size_t>& assignments);

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Index into `ks` maximising J(k-1) - 2 J(k) + J(k+1) over interior points;
/// ties go to the smaller k.
std::size_t elbow_from_inertias(const std::vector<std::size_t>& ks, const std::vector<double>& inertias);

struct ElbowResult {
    std::size_t best_k = 0;
    std::vector<std::size_t> ks;
    std::vector<double> inertias;
};

/// `ks` must be contiguous and of length >= 3.
ElbowResult elbow_select(const Matrix& x, const std::vector<std::size_t>& ks, std::uint64_t seed,
                         std::size_t restarts = 10, const KMeansOptions& options = {});

struct MetricsCell {
    std::string method;
    std::size_t k = 0;
    std::optional<double> silhouette;
    std::optional<double> davies_bouldin;
    std::string reason;  // set when a value is missing
};

struct MetricsReport {
    std::vector<std::string> methods;  // column order
    std::vector<std::size_t> ks;       // row order
    std::vector<MetricsCell> cells;    // method-major

    const MetricsCell* find(const std::string& method, std::size_t k) const;
};

/// Every (method, k) cell is fitted independently; failures become missing
/// values with a reason rather than aborting.
MetricsReport evaluate_grid(const std::vector<std::pair<std::string, FeatureMatrix>>& feature_sets,
                            const std::vector<std::size_t>& ks, std::uint64_t seed, std::size_t restarts = 10);

}  // namespace custseg
