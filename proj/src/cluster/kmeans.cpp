#include "custseg/cluster.hpp"

#include "custseg/error.hpp"
#include "custseg/kernels.hpp"
#include "custseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace custseg {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) { return kernels::squared_l2(a, b); }

Matrix plus_plus_seeds(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = x.rows();
    Matrix centroids(k, x.cols());
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);

    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            double total = 0.0;
            for (double d : nearest) total += d;
            if (total > 0.0) {
                const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
                double running = 0.0;
                pick = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (nearest[i] <= 0.0) continue;
                    running += nearest[i];
                    pick = i;
                    if (running > target) break;
                }
            } else {
                // Every point coincides with a seed; take the first unused one.
                pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
            }
        }
        chosen[pick] = true;
        std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], sq_dist(x.row(i), centroids.row(c)));
    }
    return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    if (k < 1) throw ConfigError("k-means: k must be >= 1");
    if (k > n) throw ConfigError("k-means: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");

    std::mt19937_64 rng(seed);
    KMeansModel model;
    model.k = k;
    model.seed = seed;
    model.centroids = plus_plus_seeds(x, k, rng);
    model.assignments.assign(n, k);  // k = unassigned

    std::vector<std::size_t> next(n);
    std::vector<double> cost(n);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        parallel_for(
            n,
            [&](std::size_t i) {
                std::size_t best = 0;
                double best_d = sq_dist(x.row(i), model.centroids.row(0));
                for (std::size_t c = 1; c < k; ++c) {
                    const double d = sq_dist(x.row(i), model.centroids.row(c));
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                next[i] = best;
                cost[i] = best_d;
            },
            options.threads);

        // Repair empty clusters with the point farthest from its centroid,
        // taken from a cluster that keeps at least one other member.
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[next[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[next[i]] < 2) continue;
                if (far == n || cost[i] > cost[far]) far = i;
            }
            --counts[next[far]];
            next[far] = c;
            cost[far] = 0.0;
            counts[c] = 1;
            std::copy(x.row(far).begin(), x.row(far).end(), model.centroids.row(c).begin());
        }

        double inertia = 0.0;
        for (double d : cost) inertia += d;
        model.inertia_history.push_back(inertia);
        model.inertia = inertia;
        model.iterations = iter + 1;

        const bool stable = next == model.assignments;
        model.assignments = next;
        if (stable) break;

        // Update step.
        Matrix sums(k, dim);
        for (std::size_t i = 0; i < n; ++i) kernels::axpy(1.0, x.row(i), sums.row(next[i]));
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t d = 0; d < dim; ++d) model.centroids(c, d) = sums(c, d) / static_cast<double>(counts[c]);
        }
    }

    // Inertia against the final centroids.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(x.row(i), model.centroids.row(model.assignments[i]));
    model.inertia = inertia;
    return model;
}

KMeansModel kmeans_fit_best(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts,
                            const KMeansOptions& options) {
    if (restarts < 1) restarts = 1;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::vector<std::uint64_t> seeds(restarts);
    std::vector<std::uint32_t> raw(2 * restarts);
    seq.generate(raw.begin(), raw.end());
    for (std::size_t r = 0; r < restarts; ++r) seeds[r] = (std::uint64_t(raw[2 * r]) << 32) | raw[2 * r + 1];

    KMeansModel best = kmeans_fit(x, k, seeds[0], options);
    for (std::size_t r = 1; r < restarts; ++r) {
        KMeansModel m = kmeans_fit(x, k, seeds[r], options);
        if (m.inertia < best.inertia) best = std::move(m);
    }
    return best;
}

}  // namespace custseg
