#pragma once

// Feature matrices, PCA, and hybrid (LSTM + DTW + demographic) assembly.

#include "custseg/ingest.hpp"
#include "custseg/matrix.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace custseg {

enum class FeatureSource { Lstm, Dtw, Rfm, Demographic, Hybrid };

std::string_view to_string(FeatureSource source) noexcept;
FeatureSource parse_feature_source(std::string_view text);

/// One row per customer.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> customer_ids;
    FeatureSource source = FeatureSource::Hybrid;

    std::size_t rows() const noexcept { return values.rows(); }
    std::size_t cols() const noexcept { return values.cols(); }
};

/// Throws InputError when the row count and id count differ or an entry is
/// not finite.
void validate(const FeatureMatrix& features);

/// Z-scores each column in place (population sigma). Columns with zero
/// variance are centered only; their indices are returned.
std::vector<std::size_t> zscore_columns(Matrix& values);

/// (age, gender, latitude, longitude) per customer.
FeatureMatrix demographic_features(const Dataset& dataset);

/// features.csv: "# source: <tag>" comment, then customer_id,f0,f1,...
std::string features_to_csv(const FeatureMatrix& features);
FeatureMatrix features_from_csv(std::string_view text);

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
    std::vector<double> means;
    Matrix components;                      // D x q, orthonormal columns
    std::vector<double> eigenvalues;        // q leading covariance eigenvalues
    std::vector<double> explained_ratio;    // eigenvalue / total variance

    std::size_t input_dim() const noexcept { return components.rows(); }
    std::size_t output_dim() const noexcept { return components.cols(); }
};

/// Eigen-decomposition of the sample covariance (n - 1 denominator). The
/// largest-magnitude entry of each component is made positive.
/// Requires N >= 2 and 1 <= q <= min(N - 1, D); throws ConfigError otherwise
/// and NumericError when the data has zero variance.
PcaModel pca_fit(const Matrix& x, std::size_t q);

/// Smallest q whose cumulative explained variance reaches `threshold`,
/// capped at min(N - 1, D).
std::size_t pca_choose_dims(const Matrix& x, double threshold);

Matrix pca_transform(const Matrix& x, const PcaModel& model);
/// Maps projected rows back to input space (mean added back).
Matrix pca_reconstruct(const Matrix& projected, const PcaModel& model);

FeatureMatrix pca_transform(const FeatureMatrix& x, const PcaModel& model);

// ---------------------------------------------------------------------------
// Hybrid assembly

enum class Reduction { PreConcatenation, PostConcatenation };

struct HybridSpec {
    Reduction reduction = Reduction::PreConcatenation;
    // Per-block targets for pre-concatenation; 0 picks by variance threshold.
    std::size_t lstm_dims = 0;
    std::size_t dtw_dims = 0;
    std::size_t demo_dims = 0;
    // Overall target for post-concatenation; 0 picks by variance threshold.
    std::size_t total_dims = 0;
    double variance_threshold = 0.95;
};

struct HybridResult {
    FeatureMatrix features;
    std::size_t concatenated_width = 0;        // m + n + d
    std::vector<std::size_t> block_dims;       // reduced width per block (pre-concatenation)
};

/// Blocks must list the same customers in the same order; the first
/// mismatching id is named in the InputError.
HybridResult assemble_hybrid(const FeatureMatrix& lstm, const FeatureMatrix& dtw, const FeatureMatrix& demographic,
                             const HybridSpec& spec);

}  // namespace custseg
