#include "custseg/error.hpp"
#include "custseg/features.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

using namespace custseg;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = d(rng);
    return m;
}

std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("C" + std::to_string(i));
    return out;
}

FeatureMatrix block(Matrix values, FeatureSource source) {
    const std::size_t n = values.rows();
    return FeatureMatrix{std::move(values), ids(n), source};
}

}  // namespace

TEST_CASE("collinear data has one component with ratio 1") {
    const auto x = from_rows({{1, 1}, {2, 2}, {3, 3}});
    const auto pca = pca_fit(x, 1);
    CHECK(pca.components(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(pca.components(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(pca.explained_ratio[0] == doctest::Approx(1.0).epsilon(1e-12));
    const auto p = pca_transform(x, pca);
    CHECK(p(0, 0) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(p(1, 0)) < 1e-12);
    CHECK(p(2, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("axis-aligned data orders the y axis first") {
    const auto x = from_rows({{1, 0}, {-1, 0}, {0, 3}, {0, -3}});
    const auto pca = pca_fit(x, 2);
    CHECK(pca.eigenvalues[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(pca.eigenvalues[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(pca.components(0, 0)) < 1e-12);
    CHECK(pca.components(1, 0) == doctest::Approx(1.0));
    CHECK(pca.components(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("zero variance and bad q are rejected") {
    CHECK_THROWS_AS(pca_fit(Matrix(4, 3, 2.5), 1), NumericError);
    CHECK_THROWS_AS(pca_fit(from_rows({{1, 2}}), 1), ConfigError);
    CHECK_THROWS_AS(pca_fit(from_rows({{1, 2}, {3, 1}, {0, 0}}), 3), ConfigError);
    CHECK_THROWS_AS(pca_fit(from_rows({{1, 2}, {3, 1}, {0, 0}}), 0), ConfigError);
}

TEST_CASE("PCA matches a Jacobi eigen-decomposition") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_matrix(rng, 12, 5);
        const auto pca = pca_fit(x, 5);
        const auto ref = oracle::jacobi(oracle::sample_covariance(x));
        for (std::size_t q = 0; q < 5; ++q) {
            CHECK(pca.eigenvalues[q] == doctest::Approx(ref.values[q]).epsilon(1e-10));
            double dot = 0.0;
            for (std::size_t r = 0; r < 5; ++r) dot += pca.components(r, q) * ref.vectors(r, q);
            CHECK(std::abs(std::abs(dot) - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("components are orthonormal with a positive dominant entry") {
    std::mt19937_64 rng(32);
    const auto x = random_matrix(rng, 20, 6);
    const auto pca = pca_fit(x, 4);
    for (std::size_t a = 0; a < 4; ++a) {
        std::size_t arg = 0;
        for (std::size_t r = 0; r < 6; ++r)
            if (std::abs(pca.components(r, a)) > std::abs(pca.components(arg, a))) arg = r;
        CHECK(pca.components(arg, a) > 0.0);
        for (std::size_t b = 0; b < 4; ++b) {
            double dot = 0.0;
            for (std::size_t r = 0; r < 6; ++r) dot += pca.components(r, a) * pca.components(r, b);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("projection is centered and full rank preserves distances") {
    std::mt19937_64 rng(33);
    const auto x = random_matrix(rng, 15, 4);
    const auto pca = pca_fit(x, 4);
    const auto p = pca_transform(x, pca);
    for (std::size_t c = 0; c < 4; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < 15; ++r) s += p(r, c);
        CHECK(std::abs(s / 15.0) < 1e-9);
    }
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j) CHECK(std::abs(oracle::euclid(x, i, j) - oracle::euclid(p, i, j)) < 1e-9);
    const auto back = pca_reconstruct(p, pca);
    for (std::size_t k = 0; k < x.data().size(); ++k) CHECK(std::abs(back.data()[k] - x.data()[k]) < 1e-9);
}

TEST_CASE("choose dims by variance threshold") {
    const auto x = from_rows({{1, 0}, {-1, 0}, {0, 3}, {0, -3}});
    CHECK(pca_choose_dims(x, 0.5) == 1);
    CHECK(pca_choose_dims(x, 0.95) == 2);
    CHECK(pca_choose_dims(from_rows({{1, 1}, {2, 2}, {3, 3}}), 0.95) == 1);
}

TEST_CASE("zscore_columns reports constant columns") {
    Matrix m = from_rows({{1, 5}, {3, 5}});
    const auto constant = zscore_columns(m);
    CHECK(constant == std::vector<std::size_t>{1});
    CHECK(m(0, 0) == -1.0);
    CHECK(m(1, 0) == 1.0);
    CHECK(m(0, 1) == 0.0);
}

TEST_CASE("demographic features") {
    SynthConfig c;
    c.customers = 9;
    const auto s = generate_synthetic(c);
    const auto f = demographic_features(s.dataset);
    CHECK(f.rows() == 9);
    CHECK(f.cols() == 4);
    CHECK(f.source == FeatureSource::Demographic);
    CHECK(f.values(0, 0) == s.dataset.customers[0].age);
    CHECK(f.values(3, 3) == s.dataset.customers[3].longitude);
}

TEST_CASE("features csv round trip") {
    std::mt19937_64 rng(34);
    const auto f = block(random_matrix(rng, 4, 3), FeatureSource::Dtw);
    const auto text = features_to_csv(f);
    CHECK(text.rfind("# source: dtw\ncustomer_id,f0,f1,f2\n", 0) == 0);
    const auto back = features_from_csv(text);
    CHECK(back.values == f.values);
    CHECK(back.customer_ids == f.customer_ids);
    CHECK(back.source == FeatureSource::Dtw);
    CHECK(parse_feature_source("hybrid") == FeatureSource::Hybrid);
    CHECK_THROWS_AS(parse_feature_source("tsne"), ConfigError);
}

TEST_CASE("validate catches misaligned ids and non-finite entries") {
    FeatureMatrix f = block(Matrix(2, 2, 1.0), FeatureSource::Rfm);
    CHECK_NOTHROW(validate(f));
    f.values(1, 1) = std::nan("");
    CHECK_THROWS_AS(validate(f), InputError);
    f.customer_ids.pop_back();
    CHECK_THROWS_AS(validate(f), InputError);
}

TEST_CASE("hybrid post-concatenation width is m+n+d") {
    std::mt19937_64 rng(35);
    const auto lstm = block(random_matrix(rng, 300, 8), FeatureSource::Lstm);
    const auto dtw = block(random_matrix(rng, 300, 300), FeatureSource::Dtw);
    const auto demo = block(random_matrix(rng, 300, 4), FeatureSource::Demographic);
    HybridSpec spec;
    spec.reduction = Reduction::PostConcatenation;
    spec.total_dims = 6;
    const auto r = assemble_hybrid(lstm, dtw, demo, spec);
    CHECK(r.concatenated_width == 312);
    CHECK(r.features.cols() == 6);
    CHECK(r.features.rows() == 300);
    CHECK(r.features.source == FeatureSource::Hybrid);
}

TEST_CASE("hybrid pre-concatenation sums block targets") {
    std::mt19937_64 rng(36);
    const auto lstm = block(random_matrix(rng, 30, 8), FeatureSource::Lstm);
    const auto dtw = block(random_matrix(rng, 30, 30), FeatureSource::Dtw);
    const auto demo = block(random_matrix(rng, 30, 4), FeatureSource::Demographic);
    HybridSpec spec;
    spec.lstm_dims = 4;
    spec.dtw_dims = 4;
    spec.demo_dims = 2;
    const auto r = assemble_hybrid(lstm, dtw, demo, spec);
    CHECK(r.features.cols() == 10);
    CHECK(r.block_dims == std::vector<std::size_t>{4, 4, 2});
    spec.demo_dims = 5;
    CHECK_THROWS_AS(assemble_hybrid(lstm, dtw, demo, spec), ConfigError);
}

TEST_CASE("hybrid rows follow a consistent permutation") {
    std::mt19937_64 rng(37);
    const auto lstm = block(random_matrix(rng, 25, 6), FeatureSource::Lstm);
    const auto dtw = block(random_matrix(rng, 25, 10), FeatureSource::Dtw);
    const auto demo = block(random_matrix(rng, 25, 4), FeatureSource::Demographic);
    std::vector<std::size_t> perm(25);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    auto permute = [&](const FeatureMatrix& f) {
        FeatureMatrix out = f;
        for (std::size_t r = 0; r < 25; ++r) {
            out.customer_ids[r] = f.customer_ids[perm[r]];
            for (std::size_t c = 0; c < f.cols(); ++c) out.values(r, c) = f.values(perm[r], c);
        }
        return out;
    };
    for (auto reduction : {Reduction::PreConcatenation, Reduction::PostConcatenation}) {
        HybridSpec spec;
        spec.reduction = reduction;
        const auto a = assemble_hybrid(lstm, dtw, demo, spec).features;
        const auto b = assemble_hybrid(permute(lstm), permute(dtw), permute(demo), spec).features;
        REQUIRE(a.cols() == b.cols());
        for (std::size_t r = 0; r < 25; ++r) {
            CHECK(b.customer_ids[r] == a.customer_ids[perm[r]]);
            for (std::size_t c = 0; c < a.cols(); ++c) CHECK(std::abs(b.values(r, c) - a.values(perm[r], c)) < 1e-9);
        }
    }
}

TEST_CASE("hybrid names the first mismatching customer") {
    std::mt19937_64 rng(38);
    const auto lstm = block(random_matrix(rng, 5, 3), FeatureSource::Lstm);
    auto dtw = block(random_matrix(rng, 5, 5), FeatureSource::Dtw);
    const auto demo = block(random_matrix(rng, 5, 4), FeatureSource::Demographic);
    dtw.customer_ids[2] = "X";
    try {
        assemble_hybrid(lstm, dtw, demo, {});
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("C2") != std::string::npos);
    }
}
