#include "custseg/error.hpp"
#include "custseg/preprocess.hpp"

#include <doctest.h>

#include <cmath>

using namespace custseg;

namespace {

Dataset small_dataset() {
    const std::string tx =
        "Trans_ID,Account_ID,Type,Amount,Balance,Timestamp\n"
        "T1,A1,Credit,100,100,10\n"
        "T2,A1,Debit,40,60,20\n"
        "T3,A2,Credit,500,500,15\n"
        "T4,A1,Credit,10,70,30\n"
        "T5,A2,Credit,250,750,40\n";
    const std::string cust =
        "Customer_ID,Account_ID,Gender,Age,Latitude,Longitude\n"
        "C1,A1,0.0,30,40,-70\n"
        "C2,A2,1.0,50,41,-71\n";
    return build_dataset(parse_transactions(tx), parse_customers(cust));
}

}  // namespace

TEST_CASE("padded tensor holds raw rows then zeros") {
    const auto batch = make_padded(small_dataset());
    CHECK(batch.customers() == 2);
    CHECK(batch.max_len() == 3);
    CHECK(batch.length(1) == 2);
    const auto r = batch.row(0, 1);
    CHECK(r[kType] == 0.0);
    CHECK(r[kAmount] == 40.0);
    CHECK(r[kBalance] == 60.0);
    CHECK(r[kTimestamp] == 20.0);
    for (double v : batch.row(1, 2)) CHECK(v == 0.0);
}

TEST_CASE("z-score statistics ignore padding") {
    const auto batch = make_padded(small_dataset());
    const auto p = fit_zscore(batch);
    CHECK(p.mu[kAmount] == doctest::Approx(900.0 / 5.0));
    double var = 0.0;
    for (double a : {100.0, 40.0, 500.0, 10.0, 250.0}) var += (a - 180.0) * (a - 180.0);
    CHECK(p.sigma[kAmount] == doctest::Approx(std::sqrt(var / 5.0)));
    const auto z = apply_zscore(batch, p);
    double sum = 0.0, sq = 0.0;
    for (std::size_t n = 0; n < z.customers(); ++n)
        for (std::size_t t = 0; t < z.length(n); ++t) {
            sum += z.row(n, t)[kAmount];
            sq += z.row(n, t)[kAmount] * z.row(n, t)[kAmount];
        }
    CHECK(std::abs(sum / 5.0) < 1e-12);
    CHECK(sq / 5.0 == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : z.row(1, 2)) CHECK(v == 0.0);
}

TEST_CASE("z-score round trip") {
    const auto batch = make_padded(small_dataset());
    const auto p = fit_zscore(batch);
    const auto back = invert_zscore(apply_zscore(batch, p), p);
    for (std::size_t n = 0; n < batch.customers(); ++n)
        for (std::size_t t = 0; t < batch.max_len(); ++t)
            for (std::size_t f = 0; f < kFeatureCount; ++f)
                CHECK(back.row(n, t)[f] == doctest::Approx(batch.row(n, t)[f]).epsilon(1e-12));
}

TEST_CASE("constant feature is a numeric error") {
    const std::string tx =
        "Trans_ID,Account_ID,Type,Amount,Balance,Timestamp\n"
        "T1,A1,Credit,5,5,1\nT2,A1,Credit,5,10,2\n";
    const auto d = build_dataset(parse_transactions(tx), parse_customers("Customer_ID,Account_ID,Gender,Age,Latitude,Longitude\nC,A1,0,30,0,0\n"));
    CHECK_THROWS_AS(fit_zscore(make_padded(d)), NumericError);
}

TEST_CASE("teacher forcing pairs shift by one step") {
    const auto batch = apply_zscore(make_padded(small_dataset()), fit_zscore(make_padded(small_dataset())));
    const auto pairs = make_teacher_pairs(batch);
    REQUIRE(pairs.size() == 2);
    for (std::size_t n = 0; n < 2; ++n) {
        const auto& p = pairs[n];
        const std::size_t len = batch.length(n);
        CHECK(p.length == len);
        CHECK(p.decoder_input.rows() == batch.max_len() + 1);
        CHECK(p.decoder_target.rows() == batch.max_len() + 1);
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            CHECK(p.decoder_input(0, f) == kSosValue);
            CHECK(p.decoder_target(len, f) == kEosValue);
        }
        for (std::size_t t = 0; t < len; ++t)
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                CHECK(p.decoder_input(t + 1, f) == batch.row(n, t)[f]);
                CHECK(p.decoder_target(t, f) == batch.row(n, t)[f]);
            }
        for (std::size_t t = len + 1; t <= batch.max_len(); ++t)
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                CHECK(p.decoder_input(t, f) == 0.0);
                CHECK(p.decoder_target(t, f) == 0.0);
            }
    }
}

TEST_CASE("padded debug csv lists every row") {
    const auto batch = make_padded(small_dataset());
    const auto text = padded_to_csv(batch, {"C1", "C2"});
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 1 + 2 * 3);
}
