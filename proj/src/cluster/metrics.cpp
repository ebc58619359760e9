#include "custseg/cluster.hpp"

#include "custseg/error.hpp"
#include "custseg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace custseg {

namespace {

double dist(std::span<const double> a, std::span<const double> b) { return std::sqrt(kernels::squared_l2(a, b)); }

std::size_t cluster_count(const Matrix& x, const std::vector<std::size_t>& assignments) {
    if (assignments.size() != x.rows()) throw InputError("assignment count does not match rows");
    if (assignments.empty()) throw MetricError("no points to score");
    const std::size_t k = *std::max_element(assignments.begin(), assignments.end()) + 1;
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t a : assignments) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw MetricError("cluster " + std::to_string(c) + " is empty");
    }
    if (k < 2) throw MetricError("validity index undefined for a single cluster");
    return k;
}

}  // namespace

double silhouette(const Matrix& x, const std::vector<std::size_t>& assignments) {
    const std::size_t k = cluster_count(x, assignments);
    const std::size_t n = x.rows();
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t a : assignments) ++counts[a];

    double total = 0.0;
    std::vector<double> sums(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = assignments[i];
        if (counts[own] == 1) continue;  // singleton scores 0
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sums[assignments[j]] += dist(x.row(i), x.row(j));
        }
        const double a = sums[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own) b = std::min(b, sums[c] / static_cast<double>(counts[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

double davies_bouldin(const Matrix& x, const std::vector<std::size_t>& assignments) {
    const std::size_t k = cluster_count(x, assignments);
    const std::size_t dim = x.cols();
    Matrix centroids(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        ++counts[assignments[i]];
        kernels::axpy(1.0, x.row(i), centroids.row(assignments[i]));
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t d = 0; d < dim; ++d) centroids(c, d) /= static_cast<double>(counts[c]);
    }
    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) scatter[assignments[i]] += dist(x.row(i), centroids.row(assignments[i]));
    for (std::size_t c = 0; c < k; ++c) scatter[c] /= static_cast<double>(counts[c]);

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            const double m = dist(centroids.row(i), centroids.row(j));
            if (m == 0.0) {
                throw MetricError("Davies-Bouldin undefined: centroids of clusters " + std::to_string(std::min(i, j)) +
                                  " and " + std::to_string(std::max(i, j)) + " coincide");
            }
            worst = std::max(worst, (scatter[i] + scatter[j]) / m);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) throw InputError("ARI: label vectors differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<std::size_t, std::size_t>, double> table;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto choose2 = [](double v) { return v * (v - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [_, v] : table) index += choose2(v);
    for (const auto& [_, v] : rows) sum_rows += choose2(v);
    for (const auto& [_, v] : cols) sum_cols += choose2(v);
    const double expected = sum_rows * sum_cols / choose2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;  // both partitions trivial and identical in structure
    return (index - expected) / (max_index - expected);
}

std::size_t elbow_from_inertias(const std::vector<std::size_t>& ks, const std::vector<double>& inertias) {
    if (ks.size() != inertias.size()) throw InputError("elbow: ks and inertias differ in length");
    if (ks.size() < 3) throw ConfigError("elbow: need at least three k values");
    for (std::size_t i = 1; i < ks.size(); ++i) {
        if (ks[i] != ks[i - 1] + 1) throw ConfigError("elbow: k range must be contiguous");
    }
    std::size_t best = 1;
    double best_curvature = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
        const double curvature = inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1];
        if (curvature > best_curvature) {
            best_curvature = curvature;
            best = i;
        }
    }
    return best;
}

ElbowResult elbow_select(const Matrix& x, const std::vector<std::size_t>& ks, std::uint64_t seed,
                         std::size_t restarts, const KMeansOptions& options) {
    if (ks.size() < 3) throw ConfigError("elbow: need at least three k values");
    ElbowResult result;
    result.ks = ks;
    for (std::size_t k : ks) result.inertias.push_back(kmeans_fit_best(x, k, seed, restarts, options).inertia);
    result.best_k = ks[elbow_from_inertias(ks, result.inertias)];
    return result;
}

const MetricsCell* MetricsReport::find(const std::string& method, std::size_t k) const {
    for (const auto& c : cells) {
        if (c.method == method && c.k == k) return &c;
    }
    return nullptr;
}

MetricsReport evaluate_grid(const std::vector<std::pair<std::string, FeatureMatrix>>& feature_sets,
                            const std::vector<std::size_t>& ks, std::uint64_t seed, std::size_t restarts) {
    MetricsReport report;
    report.ks = ks;
    for (std::size_t m = 0; m < feature_sets.size(); ++m) {
        const auto& [method, features] = feature_sets[m];
        if (m > 0 && features.customer_ids != feature_sets.front().second.customer_ids) {
            throw InputError("evaluate_grid: feature set '" + method + "' has a different customer order");
        }
        report.methods.push_back(method);
        for (std::size_t k : ks) {
            MetricsCell cell{method, k, std::nullopt, std::nullopt, {}};
            try {
                const KMeansModel model = kmeans_fit_best(features.values, k, seed, restarts);
                cell.silhouette = silhouette(features.values, model.assignments);
                cell.davies_bouldin = davies_bouldin(features.values, model.assignments);
            } catch (const std::exception& e) {
                cell.reason = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

}  // namespace custseg
