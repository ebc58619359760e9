#pragma once

// Dynamic time warping between customer transaction series, the customer x
// customer distance matrix, and its rows as feature vectors.

#include "custseg/features.hpp"
#include "custseg/ingest.hpp"
#include "custseg/matrix.hpp"
#include "custseg/preprocess.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace custseg {

enum class DtwMode {
    AmountOnly,  // scalar points, absolute difference
    AmountTime,  // (amount, timestamp) points, euclidean distance
};

struct DtwConfig {
    DtwMode mode = DtwMode::AmountOnly;
    bool normalize = true;  // z-score amounts (and timestamps) before warping
};

/// Chronological points of dimension 1 or 2, stored interleaved.
class DtwSeries {
public:
    DtwSeries() = default;
    DtwSeries(std::vector<double> values, std::size_t dim);
    static DtwSeries scalar(std::vector<double> values) { return DtwSeries(std::move(values), 1); }

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return values_.empty(); }
    std::span<const double> point(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
    std::size_t dim_ = 1;
};

/// Zero-based (i, j) couples from (0, 0) to (S - 1, T - 1).
using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
    double cost = 0.0;
    WarpPath path;
};

/// Pointwise metric: |a - b| for scalar series, euclidean for 2-D series.
double dtw_delta(std::span<const double> a, std::span<const double> b);

/// Full DP with predecessor tracking. Among equal-cost predecessors the
/// diagonal wins, then (i, j - 1), then (i - 1, j).
/// Throws InputError on empty series or mismatched dimensions.
DtwResult dtw_distance(const DtwSeries& a, const DtwSeries& b);

/// Cost only, two-row DP driven by the active SIMD kernels. Equals
/// dtw_distance(a, b).cost exactly.
double dtw_cost(const DtwSeries& a, const DtwSeries& b);

struct DistanceMatrix {
    Matrix values;  // symmetric, zero diagonal
    std::vector<std::string> customer_ids;
};

/// Upper triangle in parallel, mirrored. Requires at least two series.
DistanceMatrix dtw_matrix(const std::vector<DtwSeries>& series, const std::vector<std::string>& customer_ids,
                          unsigned threads = 0);

/// Row i of the matrix is customer i's feature vector.
FeatureMatrix dtw_features(const DistanceMatrix& matrix);

/// Series per customer from raw records. With `normalize`, amounts and
/// timestamps are z-scored using `params` (fit on the same dataset when
/// absent).
std::vector<DtwSeries> dtw_series(const Dataset& dataset, const DtwConfig& config,
                                  const std::optional<ZScoreParams>& params = std::nullopt);

/// customer_id header row and column.
std::string distance_matrix_to_csv(const DistanceMatrix& matrix);

}  // namespace custseg
