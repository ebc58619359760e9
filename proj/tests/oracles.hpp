#pragma once

// Slow, direct implementations used only as test oracles. None of them call
// into the library's numeric code.

#include "custseg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using custseg::Matrix;

inline double euclid(const Matrix& x, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        const double d = x(i, c) - x(j, c);
        s += d * d;
    }
    return std::sqrt(s);
}

/// Minimum accumulated cost over every monotone unit-step path from (0,0)
/// to (S-1,T-1), by explicit enumeration.
inline double dtw_brute(std::size_t s, std::size_t t, const std::function<double(std::size_t, std::size_t)>& delta) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
        acc += delta(i, j);
        if (i + 1 == s && j + 1 == t) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < s) walk(i + 1, j, acc);
        if (j + 1 < t) walk(i, j + 1, acc);
        if (i + 1 < s && j + 1 < t) walk(i + 1, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

/// Number of monotone unit-step paths (Delannoy number), for sanity checks.
inline std::size_t dtw_path_count(std::size_t s, std::size_t t) {
    std::vector<std::vector<std::size_t>> d(s, std::vector<std::size_t>(t, 0));
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < t; ++j) {
            if (i == 0 || j == 0) {
                d[i][j] = 1;
            } else {
                d[i][j] = d[i - 1][j] + d[i][j - 1] + d[i - 1][j - 1];
            }
        }
    }
    return d[s - 1][t - 1];
}

inline double partition_inertia(const Matrix& x, const std::vector<std::size_t>& labels, std::size_t k) {
    double total = 0.0;
    for (std::size_t g = 0; g < k; ++g) {
        std::vector<double> mean(x.cols(), 0.0);
        std::size_t n = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (labels[i] != g) continue;
            ++n;
            for (std::size_t c = 0; c < x.cols(); ++c) mean[c] += x(i, c);
        }
        if (n == 0) continue;
        for (double& m : mean) m /= static_cast<double>(n);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (labels[i] != g) continue;
            for (std::size_t c = 0; c < x.cols(); ++c) total += (x(i, c) - mean[c]) * (x(i, c) - mean[c]);
        }
    }
    return total;
}

/// Optimal k-means objective over all labelings with k non-empty groups.
inline double kmeans_optimum(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    std::vector<std::size_t> labels(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<bool> used(k, false);
        for (std::size_t l : labels) used[l] = true;
        if (std::all_of(used.begin(), used.end(), [](bool b) { return b; })) {
            best = std::min(best, partition_inertia(x, labels, k));
        }
        std::size_t pos = 0;
        while (pos < n && ++labels[pos] == k) labels[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

inline double silhouette(const Matrix& x, const std::vector<std::size_t>& labels) {
    const std::size_t n = x.rows();
    std::size_t k = 0;
    for (std::size_t l : labels) k = std::max(k, l + 1);
    std::vector<std::size_t> size(k, 0);
    for (std::size_t l : labels) ++size[l];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (size[labels[i]] == 1) continue;
        std::vector<double> sum(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sum[labels[j]] += euclid(x, i, j);
        }
        const double a = sum[labels[i]] / static_cast<double>(size[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < k; ++g) {
            if (g != labels[i] && size[g] > 0) b = std::min(b, sum[g] / static_cast<double>(size[g]));
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

inline double davies_bouldin(const Matrix& x, const std::vector<std::size_t>& labels) {
    std::size_t k = 0;
    for (std::size_t l : labels) k = std::max(k, l + 1);
    Matrix centroid(k, x.cols());
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        count[labels[i]] += 1.0;
        for (std::size_t c = 0; c < x.cols(); ++c) centroid(labels[i], c) += x(i, c);
    }
    for (std::size_t g = 0; g < k; ++g) {
        for (std::size_t c = 0; c < x.cols(); ++c) centroid(g, c) /= count[g];
    }
    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - centroid(labels[i], c)) * (x(i, c) - centroid(labels[i], c));
        scatter[labels[i]] += std::sqrt(s) / count[labels[i]];
    }
    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        double worst = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            worst = std::max(worst, (scatter[a] + scatter[b]) / euclid(centroid, a, b));
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

/// Adjusted Rand index from explicit pair counting.
inline double ari(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const std::size_t n = a.size();
    double both = 0, only_a = 0, only_b = 0, neither = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j], sb = b[i] == b[j];
            if (sa && sb) {
                ++both;
            } else if (sa) {
                ++only_a;
            } else if (sb) {
                ++only_b;
            } else {
                ++neither;
            }
        }
    }
    const double pairs = both + only_a + only_b + neither;
    const double pa = both + only_a, pb = both + only_b;
    const double expected = pa * pb / pairs;
    const double max_index = 0.5 * (pa + pb);
    if (max_index == expected) return 1.0;
    return (both - expected) / (max_index - expected);
}

struct Eigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns
};

/// Cyclic Jacobi rotations on a symmetric matrix.
inline Eigen jacobi(Matrix a) {
    const std::size_t n = a.rows();
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double apr = a(p, r), aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    Eigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

inline Matrix sample_covariance(const Matrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += x(i, c) / static_cast<double>(n);
    }
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) cov(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / static_cast<double>(n - 1);
        }
    }
    return cov;
}

}  // namespace oracle
