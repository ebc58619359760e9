#include "custseg/dtw.hpp"

#include "custseg/csv.hpp"
#include "custseg/error.hpp"
#include "custseg/kernels.hpp"
#include "custseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace custseg {

DtwSeries::DtwSeries(std::vector<double> values, std::size_t dim) : values_(std::move(values)), dim_(dim) {
    if (dim_ != 1 && dim_ != 2) throw InputError("DTW series dimension must be 1 or 2");
    if (values_.size() % dim_ != 0) throw InputError("DTW series values not a multiple of the dimension");
}

double dtw_delta(std::span<const double> a, std::span<const double> b) {
    if (a.size() == 1) return std::fabs(a[0] - b[0]);
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

namespace {

void check_pair(const DtwSeries& a, const DtwSeries& b) {
    if (a.empty() || b.empty()) throw InputError("DTW needs non-empty series");
    if (a.dim() != b.dim()) throw InputError("DTW series dimensions differ");
}

enum class Step : std::uint8_t { Start, Diagonal, Left, Down };

}  // namespace

DtwResult dtw_distance(const DtwSeries& a, const DtwSeries& b) {
    check_pair(a, b);
    const std::size_t S = a.size();
    const std::size_t T = b.size();
    std::vector<double> cost(S * T);
    std::vector<Step> from(S * T, Step::Start);
    auto at = [T](std::size_t i, std::size_t j) { return i * T + j; };

    cost[0] = dtw_delta(a.point(0), b.point(0));
    for (std::size_t i = 1; i < S; ++i) {
        cost[at(i, 0)] = cost[at(i - 1, 0)] + dtw_delta(a.point(i), b.point(0));
        from[at(i, 0)] = Step::Down;
    }
    for (std::size_t j = 1; j < T; ++j) {
        cost[at(0, j)] = cost[at(0, j - 1)] + dtw_delta(a.point(0), b.point(j));
        from[at(0, j)] = Step::Left;
    }
    for (std::size_t i = 1; i < S; ++i) {
        for (std::size_t j = 1; j < T; ++j) {
            double best = cost[at(i - 1, j - 1)];
            Step step = Step::Diagonal;
            if (cost[at(i, j - 1)] < best) {
                best = cost[at(i, j - 1)];
                step = Step::Left;
            }
            if (cost[at(i - 1, j)] < best) {
                best = cost[at(i - 1, j)];
                step = Step::Down;
            }
            cost[at(i, j)] = best + dtw_delta(a.point(i), b.point(j));
            from[at(i, j)] = step;
        }
    }

    DtwResult result;
    result.cost = cost[at(S - 1, T - 1)];
    std::size_t i = S - 1;
    std::size_t j = T - 1;
    result.path.emplace_back(i, j);
    while (from[at(i, j)] != Step::Start) {
        switch (from[at(i, j)]) {
            case Step::Diagonal: --i; --j; break;
            case Step::Left: --j; break;
            case Step::Down: --i; break;
            case Step::Start: break;
        }
        result.path.emplace_back(i, j);
    }
    std::reverse(result.path.begin(), result.path.end());
    return result;
}

double dtw_cost(const DtwSeries& a, const DtwSeries& b) {
    check_pair(a, b);
    const auto& k = kernels::active();
    const std::size_t S = a.size();
    const std::size_t T = b.size();
    const double* bv = b.values().data();
    std::vector<double> prev(T), cur(T), delta(T), relaxed(T);

    auto fill_delta = [&](std::size_t i) {
        const auto p = a.point(i);
        if (a.dim() == 1) {
            k.abs_diff(p[0], bv, delta.data(), T);
        } else {
            k.euclid_diff(p[0], p[1], bv, delta.data(), T);
        }
    };

    fill_delta(0);
    prev[0] = delta[0];
    for (std::size_t j = 1; j < T; ++j) prev[j] = prev[j - 1] + delta[j];

    for (std::size_t i = 1; i < S; ++i) {
        fill_delta(i);
        cur[0] = prev[0] + delta[0];
        // Vertical and diagonal predecessors come from the previous row and
        // vectorize; the left predecessor is a sequential scan.
        if (T > 1) k.min_add(prev.data(), prev.data() + 1, delta.data() + 1, relaxed.data() + 1, T - 1);
        for (std::size_t j = 1; j < T; ++j) cur[j] = std::min(relaxed[j], cur[j - 1] + delta[j]);
        std::swap(prev, cur);
    }
    return prev[T - 1];
}

DistanceMatrix dtw_matrix(const std::vector<DtwSeries>& series, const std::vector<std::string>& customer_ids,
                          unsigned threads) {
    const std::size_t n = series.size();
    if (n < 2) throw InputError("DTW matrix needs at least two series");
    if (customer_ids.size() != n) throw InputError("DTW matrix: customer id count does not match series count");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }

    DistanceMatrix out{Matrix(n, n, 0.0), customer_ids};
    std::vector<std::string> failures(pairs.size());
    parallel_for(
        pairs.size(),
        [&](std::size_t p) {
            const auto [i, j] = pairs[p];
            try {
                out.values(i, j) = dtw_cost(series[i], series[j]);
            } catch (const std::exception& e) {
                failures[p] = e.what();
            }
        },
        threads);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (!failures[p].empty()) {
            throw InputError("DTW pair (" + std::to_string(pairs[p].first) + ", " + std::to_string(pairs[p].second) +
                             "): " + failures[p]);
        }
    }
    for (const auto& [i, j] : pairs) out.values(j, i) = out.values(i, j);
    return out;
}

FeatureMatrix dtw_features(const DistanceMatrix& matrix) {
    return FeatureMatrix{matrix.values, matrix.customer_ids, FeatureSource::Dtw};
}

std::vector<DtwSeries> dtw_series(const Dataset& dataset, const DtwConfig& config,
                                  const std::optional<ZScoreParams>& params) {
    double amount_mu = 0.0, amount_sigma = 1.0, ts_mu = 0.0, ts_sigma = 1.0;
    if (config.normalize) {
        const ZScoreParams p = params ? *params : fit_zscore(make_padded(dataset));
        amount_mu = p.mu[kAmount];
        amount_sigma = p.sigma[kAmount];
        ts_mu = p.mu[kTimestamp];
        ts_sigma = p.sigma[kTimestamp];
    }
    const std::size_t dim = config.mode == DtwMode::AmountOnly ? 1 : 2;
    std::vector<DtwSeries> out;
    out.reserve(dataset.sequences.size());
    for (const auto& seq : dataset.sequences) {
        std::vector<double> values;
        values.reserve(seq.length() * dim);
        for (const auto& rec : seq.records) {
            values.push_back((rec.amount - amount_mu) / amount_sigma);
            if (dim == 2) values.push_back((static_cast<double>(rec.timestamp) - ts_mu) / ts_sigma);
        }
        out.emplace_back(std::move(values), dim);
    }
    return out;
}

std::string distance_matrix_to_csv(const DistanceMatrix& matrix) {
    std::vector<std::string> header{"customer_id"};
    header.insert(header.end(), matrix.customer_ids.begin(), matrix.customer_ids.end());
    std::string out = csv::join(header) + "\n";
    for (std::size_t i = 0; i < matrix.values.rows(); ++i) {
        std::vector<std::string> cells{matrix.customer_ids[i]};
        for (double v : matrix.values.row(i)) cells.push_back(csv::format(v));
        out += csv::join(cells) + "\n";
    }
    return out;
}

}  // namespace custseg
