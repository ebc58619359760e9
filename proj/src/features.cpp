#include "custseg/features.hpp"

#include "custseg/csv.hpp"
#include "custseg/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace custseg {

std::string_view to_string(FeatureSource source) noexcept {
    switch (source) {
        case FeatureSource::Lstm: return "lstm";
        case FeatureSource::Dtw: return "dtw";
        case FeatureSource::Rfm: return "rfm";
        case FeatureSource::Demographic: return "demographic";
        case FeatureSource::Hybrid: return "hybrid";
    }
    return "unknown";
}

FeatureSource parse_feature_source(std::string_view text) {
    for (auto s : {FeatureSource::Lstm, FeatureSource::Dtw, FeatureSource::Rfm, FeatureSource::Demographic,
                   FeatureSource::Hybrid}) {
        if (to_string(s) == text) return s;
    }
    throw ConfigError("unknown feature source '" + std::string(text) + "'");
}

void validate(const FeatureMatrix& features) {
    if (features.customer_ids.size() != features.rows()) {
        throw InputError("feature matrix has " + std::to_string(features.rows()) + " rows but " +
                         std::to_string(features.customer_ids.size()) + " customer ids");
    }
    for (double v : features.values.data()) {
        if (!std::isfinite(v)) throw InputError("feature matrix contains a non-finite entry");
    }
}

std::vector<std::size_t> zscore_columns(Matrix& values) {
    std::vector<std::size_t> degenerate;
    const std::size_t n = values.rows();
    if (n == 0) return degenerate;
    for (std::size_t c = 0; c < values.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += values(r, c);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = values(r, c) - mean;
            ss += d * d;
        }
        const double sigma = std::sqrt(ss / static_cast<double>(n));
        const bool flat = !(sigma > 1e-12 * std::max(1.0, std::fabs(mean)));
        for (std::size_t r = 0; r < n; ++r) {
            values(r, c) = flat ? 0.0 : (values(r, c) - mean) / sigma;
        }
        if (flat) degenerate.push_back(c);
    }
    return degenerate;
}

FeatureMatrix demographic_features(const Dataset& dataset) {
    FeatureMatrix out{Matrix(dataset.size(), 4), dataset.customer_ids(), FeatureSource::Demographic};
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& c = dataset.customers[i];
        out.values(i, 0) = c.age;
        out.values(i, 1) = c.gender;
        out.values(i, 2) = c.latitude;
        out.values(i, 3) = c.longitude;
    }
    return out;
}

std::string features_to_csv(const FeatureMatrix& features) {
    std::string out = "# source: " + std::string(to_string(features.source)) + "\n";
    std::vector<std::string> header{"customer_id"};
    for (std::size_t c = 0; c < features.cols(); ++c) header.push_back("f" + std::to_string(c));
    out += csv::join(header) + "\n";
    for (std::size_t r = 0; r < features.rows(); ++r) {
        std::vector<std::string> cells{features.customer_ids.at(r)};
        for (double v : features.values.row(r)) cells.push_back(csv::format(v));
        out += csv::join(cells) + "\n";
    }
    return out;
}

FeatureMatrix features_from_csv(std::string_view text) {
    FeatureMatrix out;
    const std::string_view tag = "# source: ";
    if (text.substr(0, tag.size()) == tag) {
        const auto eol = text.find_first_of("\r\n");
        out.source = parse_feature_source(text.substr(tag.size(), eol - tag.size()));
    }
    const csv::Table table = csv::parse(text);
    const std::size_t id_col = table.column("customer_id");
    const std::size_t width = table.header.size() - 1;
    out.values = Matrix(table.rows.size(), width);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out.customer_ids.push_back(table.rows[r][id_col]);
        std::size_t c = 0;
        for (std::size_t k = 0; k < table.header.size(); ++k) {
            if (k == id_col) continue;
            out.values(r, c++) = csv::parse_double(table.rows[r][k], r, table.header[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Spectrum {
    std::vector<double> means;
    Eigen::MatrixXd vectors;   // columns sorted by descending eigenvalue
    Eigen::VectorXd values;
    double total = 0.0;
};

Spectrum covariance_spectrum(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) throw ConfigError("PCA needs at least two rows");
    if (d < 1) throw ConfigError("PCA needs at least one column");

    Spectrum s;
    s.means.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) s.means[c] += x(r, c);
    }
    for (double& m : s.means) m /= static_cast<double>(n);

    Eigen::MatrixXd centered(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) centered(r, c) = x(r, c) - s.means[c];
    }
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    s.total = cov.trace();
    if (!(s.total > 0.0)) throw NumericError("PCA: data has zero variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("PCA: eigen-decomposition failed");
    // Eigen returns ascending order.
    s.values = solver.eigenvalues().reverse();
    s.vectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index k = 0; k < s.values.size(); ++k) s.values(k) = std::max(0.0, s.values(k));
    return s;
}

}  // namespace

PcaModel pca_fit(const Matrix& x, std::size_t q) {
    const std::size_t limit = std::min(x.rows() > 0 ? x.rows() - 1 : 0, x.cols());
    if (q < 1 || q > limit) {
        throw ConfigError("PCA: q=" + std::to_string(q) + " outside [1, " + std::to_string(limit) + "]");
    }
    const Spectrum s = covariance_spectrum(x);
    const std::size_t d = x.cols();

    PcaModel model;
    model.means = s.means;
    model.components = Matrix(d, q);
    for (std::size_t k = 0; k < q; ++k) {
        const auto idx = static_cast<Eigen::Index>(k);
        // Sign: largest-magnitude entry positive (first index on ties).
        std::size_t pivot = 0;
        for (std::size_t r = 1; r < d; ++r) {
            if (std::fabs(s.vectors(static_cast<Eigen::Index>(r), idx)) >
                std::fabs(s.vectors(static_cast<Eigen::Index>(pivot), idx)) + 1e-12) {
                pivot = r;
            }
        }
        const double sign = s.vectors(static_cast<Eigen::Index>(pivot), idx) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < d; ++r) model.components(r, k) = sign * s.vectors(static_cast<Eigen::Index>(r), idx);
        model.eigenvalues.push_back(s.values(idx));
        model.explained_ratio.push_back(s.values(idx) / s.total);
    }
    return model;
}

std::size_t pca_choose_dims(const Matrix& x, double threshold) {
    const std::size_t limit = std::min(x.rows() > 0 ? x.rows() - 1 : 0, x.cols());
    if (limit < 1) throw ConfigError("PCA: not enough rows or columns to reduce");
    const Spectrum s = covariance_spectrum(x);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < limit; ++k) {
        cumulative += s.values(static_cast<Eigen::Index>(k)) / s.total;
        if (cumulative >= threshold - 1e-12) return k + 1;
    }
    return limit;
}

Matrix pca_transform(const Matrix& x, const PcaModel& model) {
    if (x.cols() != model.input_dim()) {
        throw InputError("PCA transform: width " + std::to_string(x.cols()) + " does not match model width " +
                         std::to_string(model.input_dim()));
    }
    Matrix out(x.rows(), model.output_dim());
    std::vector<double> centered(x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) centered[c] = x(r, c) - model.means[c];
        for (std::size_t k = 0; k < model.output_dim(); ++k) {
            double acc = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) acc += centered[c] * model.components(c, k);
            out(r, k) = acc;
        }
    }
    return out;
}

Matrix pca_reconstruct(const Matrix& projected, const PcaModel& model) {
    if (projected.cols() != model.output_dim()) throw InputError("PCA reconstruct: width mismatch");
    Matrix out(projected.rows(), model.input_dim());
    for (std::size_t r = 0; r < projected.rows(); ++r) {
        for (std::size_t c = 0; c < model.input_dim(); ++c) {
            double acc = model.means[c];
            for (std::size_t k = 0; k < model.output_dim(); ++k) acc += projected(r, k) * model.components(c, k);
            out(r, c) = acc;
        }
    }
    return out;
}

FeatureMatrix pca_transform(const FeatureMatrix& x, const PcaModel& model) {
    return FeatureMatrix{pca_transform(x.values, model), x.customer_ids, x.source};
}

// ---------------------------------------------------------------------------

namespace {

void check_alignment(const FeatureMatrix& reference, const FeatureMatrix& other) {
    validate(other);
    const std::size_t n = std::min(reference.rows(), other.rows());
    for (std::size_t i = 0; i < n; ++i) {
        if (reference.customer_ids[i] != other.customer_ids[i]) {
            throw InputError("hybrid: customer order mismatch at row " + std::to_string(i) + " (" +
                             reference.customer_ids[i] + " vs " + other.customer_ids[i] + ")");
        }
    }
    if (reference.rows() != other.rows()) {
        const auto& longer = reference.rows() > other.rows() ? reference : other;
        throw InputError("hybrid: block row counts differ; first unmatched customer " + longer.customer_ids[n]);
    }
}

Matrix reduce_block(const Matrix& block, std::size_t target, double threshold) {
    const std::size_t limit = std::min(block.rows() - 1, block.cols());
    std::size_t q = target == 0 ? pca_choose_dims(block, threshold) : target;
    if (q > limit) throw ConfigError("hybrid: block target " + std::to_string(q) + " exceeds " + std::to_string(limit));
    return pca_transform(block, pca_fit(block, q));
}

}  // namespace

HybridResult assemble_hybrid(const FeatureMatrix& lstm, const FeatureMatrix& dtw, const FeatureMatrix& demographic,
                             const HybridSpec& spec) {
    validate(lstm);
    check_alignment(lstm, dtw);
    check_alignment(lstm, demographic);

    const std::size_t n = lstm.rows();
    std::vector<Matrix> blocks{lstm.values, dtw.values, demographic.values};
    for (auto& b : blocks) zscore_columns(b);

    HybridResult result;
    result.concatenated_width = lstm.cols() + dtw.cols() + demographic.cols();

    auto concat = [n](const std::vector<Matrix>& parts) {
        std::size_t width = 0;
        for (const auto& p : parts) width += p.cols();
        Matrix out(n, width);
        std::size_t offset = 0;
        for (const auto& p : parts) {
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < p.cols(); ++c) out(r, offset + c) = p(r, c);
            }
            offset += p.cols();
        }
        return out;
    };

    Matrix combined;
    if (spec.reduction == Reduction::PreConcatenation) {
        const std::size_t targets[3] = {spec.lstm_dims, spec.dtw_dims, spec.demo_dims};
        std::vector<Matrix> reduced;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            reduced.push_back(reduce_block(blocks[b], targets[b], spec.variance_threshold));
            result.block_dims.push_back(reduced.back().cols());
        }
        combined = concat(reduced);
    } else {
        combined = reduce_block(concat(blocks), spec.total_dims, spec.variance_threshold);
    }
    result.features = FeatureMatrix{std::move(combined), lstm.customer_ids, FeatureSource::Hybrid};
    return result;
}

}  // namespace custseg
