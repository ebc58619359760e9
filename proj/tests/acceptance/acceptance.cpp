// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "custseg/cluster.hpp"
#include "custseg/csv.hpp"
#include "custseg/dtw.hpp"
#include "custseg/features.hpp"
#include "custseg/kernels.hpp"
#include "custseg/pipeline.hpp"
#include "custseg/preprocess.hpp"
#include "custseg/seq2seq.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace custseg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

std::string fmt(const char* format, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, format, a, b);
    return buf;
}

PipelineConfig shipped_config() {
    const fs::path dir = fixture::source_dir() / "configs";
    return parse_pipeline_config(csv::read_file(dir / "synthetic.json"), dir);
}

Matrix normal_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = d(rng);
    return m;
}

// 1 ---------------------------------------------------------------------------

Outcome dtw_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<std::size_t> len(1, 6);
    std::uniform_int_distribution<int> ints(-9, 9);
    std::normal_distribution<double> reals(0.0, 2.0);
    std::size_t exact = 0, close = 0, worst_int = 0;
    double worst_real = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const bool integers = trial < 250;
        std::vector<double> a(len(rng)), b(len(rng));
        for (auto* v : {&a, &b})
            for (auto& x : *v) x = integers ? ints(rng) : reals(rng);
        const double dp = dtw_distance(DtwSeries::scalar(a), DtwSeries::scalar(b)).cost;
        const double brute =
            oracle::dtw_brute(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return std::fabs(a[i] - b[j]); });
        if (integers) {
            if (dp == brute) ++exact; else ++worst_int;
        } else {
            worst_real = std::max(worst_real, std::fabs(dp - brute));
            if (std::fabs(dp - brute) <= 1e-12) ++close;
        }
    }
    const double t = seconds_since(start);
    const bool pass = exact == 250 && close == 250 && t < 10.0;
    return {pass, std::to_string(exact) + "/250 integer exact, " + std::to_string(close) + "/250 real within 1e-12, max real err " +
                      fmt("%.2e", worst_real) + ", " + fmt("%.2f s", t)};
}

// 2 ---------------------------------------------------------------------------

Outcome dtw_hand() {
    const double c1 = dtw_distance(DtwSeries::scalar({1, 2, 3}), DtwSeries::scalar({2, 3})).cost;
    const double c2 = dtw_distance(DtwSeries::scalar({1, 2, 3}), DtwSeries::scalar({1, 2, 3})).cost;
    const double c3 = dtw_distance(DtwSeries::scalar({0}), DtwSeries::scalar({3})).cost;
    const bool pass = c1 == 1.0 && c2 == 0.0 && c3 == 3.0;
    return {pass, "([1,2,3],[2,3])=" + csv::format(c1) + ", identical=" + csv::format(c2) + ", ([0],[3])=" + csv::format(c3)};
}

// 3 ---------------------------------------------------------------------------

Outcome distance_matrix() {
    const auto config = shipped_config();
    const auto data = load_data(config);
    const auto start = Clock::now();
    const auto series = dtw_series(data.dataset, config.dtw);
    const auto m = dtw_matrix(series, data.dataset.customer_ids(), config.threads);
    const double t = seconds_since(start);
    bool symmetric = true, zero_diag = true, nonneg = true;
    const std::size_t n = m.values.rows();
    for (std::size_t i = 0; i < n; ++i) {
        zero_diag = zero_diag && m.values(i, i) == 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            symmetric = symmetric && m.values(i, j) == m.values(j, i);
            nonneg = nonneg && m.values(i, j) >= 0.0;
        }
    }
    const bool pass = n == 300 && symmetric && zero_diag && nonneg && t < 60.0;
    return {pass, std::to_string(n) + "x" + std::to_string(n) + ", symmetric=" + (symmetric ? "yes" : "no") +
                      ", zero diagonal=" + (zero_diag ? "yes" : "no") + ", non-negative=" + (nonneg ? "yes" : "no") +
                      ", " + fmt("%.2f s", t) + ", kernels " + std::string(kernels::name(kernels::active().backend))};
}

// 4 ---------------------------------------------------------------------------

Outcome gradient() {
    const auto model = Seq2SeqModel::initialize(fixture::gradient_model(), 3);
    const auto batch = fixture::gradient_batch();
    const double good = gradient_check(model, batch).max_relative_error;
    const double bad = gradient_check(model, batch, GradientFault::ForgetGate).max_relative_error;
    return {good < 1e-4 && bad > 1e-2, fmt("max relative error %.2e, forget-gate mutation %.2e", good, bad)};
}

// 5 ---------------------------------------------------------------------------

Outcome teacher_forcing() {
    const auto config = shipped_config();
    const auto data = load_data(config);
    const auto raw = make_padded(data.dataset);
    const auto batch = apply_zscore(raw, fit_zscore(raw));
    const auto pairs = make_teacher_pairs(batch);
    std::size_t good = 0;
    for (const auto& p : pairs) {
        bool ok = true;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            ok = ok && p.decoder_input(0, f) == -1.0 && p.decoder_target(p.length, f) == -2.0;
            for (std::size_t i = 0; i < p.length; ++i) ok = ok && p.decoder_target(i, f) == p.decoder_input(i + 1, f);
        }
        good += ok;
    }
    return {good == pairs.size() && pairs.size() == 300, std::to_string(good) + "/" + std::to_string(pairs.size()) + " customers"};
}

// 6 ---------------------------------------------------------------------------

Outcome copy_task() {
    const auto batch = fixture::copy_task_batch();
    const auto config = fixture::copy_task_config();
    const auto a = train(batch, config);
    const auto b = train(batch, config);
    const double first = a.losses.front().train_loss;
    const double last = a.losses.back().train_loss;
    const bool identical = a.losses == b.losses;
    const bool pass = last < 0.1 * first && identical && config.epochs <= 200;
    return {pass, fmt("loss %.4f -> %.4f", first, last) + fmt(", ratio %.4f", last / first) +
                      ", repeat bit-identical=" + (identical ? "yes" : "no")};
}

// 7 ---------------------------------------------------------------------------

Outcome metric_oracles() {
    std::mt19937_64 rng(1007);
    std::uniform_int_distribution<std::size_t> npts(2, 50);
    std::uniform_int_distribution<std::size_t> ks(2, 5);
    std::uniform_int_distribution<std::size_t> dims(1, 4);
    double worst_sc = 0.0, worst_dbi = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = ks(rng);
        const std::size_t n = std::max(k, npts(rng));
        const Matrix x = normal_matrix(rng, n, dims(rng));
        std::vector<std::size_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = i < k ? i : rng() % k;
        worst_sc = std::max(worst_sc, std::fabs(silhouette(x, labels) - oracle::silhouette(x, labels)));
        worst_dbi = std::max(worst_dbi, std::fabs(davies_bouldin(x, labels) - oracle::davies_bouldin(x, labels)));
    }
    Matrix hand(4, 1);
    const double pts[] = {0, 0.1, 10, 10.1};
    for (std::size_t i = 0; i < 4; ++i) hand(i, 0) = pts[i];
    const double sc = silhouette(hand, {0, 0, 1, 1});
    const double dbi = davies_bouldin(hand, {0, 0, 1, 1});
    const bool pass = worst_sc <= 1e-9 && worst_dbi <= 1e-9 && std::fabs(sc - 0.99) <= 1e-5 && std::fabs(dbi - 0.01) <= 1e-9;
    return {pass, fmt("max |dSC| %.2e, ", worst_sc) + fmt("max |dDBI| %.2e; ", worst_dbi) +
                      fmt("hand SC %.6f, DBI %.12f", sc, dbi)};
}

// 8 ---------------------------------------------------------------------------

Outcome kmeans_optimality() {
    std::mt19937_64 rng(1008);
    std::uniform_int_distribution<std::size_t> npts(3, 8);
    std::uniform_int_distribution<std::size_t> ks(1, 3);
    std::size_t optimal = 0, monotone = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = npts(rng);
        const std::size_t k = ks(rng);
        const Matrix x = normal_matrix(rng, n, 2);
        const auto best = kmeans_fit_best(x, k, static_cast<std::uint64_t>(trial), 10);
        if (std::fabs(best.inertia - oracle::kmeans_optimum(x, k)) <= 1e-9) ++optimal;
        bool ok = true;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const auto m = kmeans_fit(x, k, s * 7919 + static_cast<std::uint64_t>(trial));
            for (std::size_t i = 1; i < m.inertia_history.size(); ++i) ok = ok && m.inertia_history[i] <= m.inertia_history[i - 1];
        }
        for (std::size_t i = 1; i < best.inertia_history.size(); ++i) ok = ok && best.inertia_history[i] <= best.inertia_history[i - 1];
        monotone += ok;
    }
    return {optimal >= 48 && monotone == 50,
            std::to_string(optimal) + "/50 optimal within 1e-9, inertia non-increasing on " + std::to_string(monotone) + "/50"};
}

// Shared by 9-12.

struct ShippedRun {
    RunManifest manifest;
    RunManifest repeat;
    fs::path out;
    fs::path out_repeat;
    double seconds = 0.0;
};

ShippedRun run_shipped() {
    ShippedRun r;
    const fs::path root = fs::temp_directory_path() / "custseg_acceptance";
    fs::remove_all(root);
    r.out = root / "a";
    r.out_repeat = root / "b";
    auto config = shipped_config();
    config.out = r.out;
    const auto start = Clock::now();
    r.manifest = run_pipeline(config);
    r.seconds = seconds_since(start);
    config.out = r.out_repeat;
    r.repeat = run_pipeline(config);
    return r;
}

// 9 ---------------------------------------------------------------------------

Outcome elbow(const ShippedRun& run) {
    const std::size_t profile = elbow_from_inertias({1, 2, 3, 4, 5}, {100, 40, 20, 18, 17}) + 1;
    const std::size_t planted = run.manifest.elbow_k.at("hybrid");
    return {profile == 2 && planted == 3,
            "profile [100,40,20,18,17] -> k=" + std::to_string(profile) + ", shipped synthetic hybrid -> k=" + std::to_string(planted)};
}

// 10 --------------------------------------------------------------------------

Outcome recovery(const ShippedRun& run) {
    const auto config = shipped_config();
    const auto data = load_data(config);
    const auto hybrid = features_from_csv(csv::read_file(run.out / "features_hybrid.csv"));
    const auto model = kmeans_fit_best(clustering_input(hybrid), 3, stage_seed(config.seed, "cluster:hybrid"), config.cluster.restarts);
    std::vector<std::size_t> planted;
    for (int l : *data.labels) planted.push_back(static_cast<std::size_t>(l));
    const double ari = adjusted_rand_index(model.assignments, planted);
    return {ari >= 0.8 && run.seconds < 300.0, fmt("hybrid ARI at k=3 %.4f, pipeline %.1f s", ari, run.seconds)};
}

// 11 --------------------------------------------------------------------------

Outcome report_structure(const ShippedRun& run) {
    const auto table = csv::parse(csv::read_file(run.out / "metrics.csv"));
    const std::vector<std::string> header{"k", "lstm_SC", "lstm_DBI", "dtw_SC", "dtw_DBI",
                                          "rfm_SC", "rfm_DBI", "hybrid_SC", "hybrid_DBI"};
    bool shape = table.header == header && table.rows.size() == 5;
    std::size_t cells = 0;
    for (std::size_t r = 0; shape && r < table.rows.size(); ++r) {
        shape = shape && table.rows[r][0] == std::to_string(r + 2);
        for (std::size_t c = 1; c < table.rows[r].size(); ++c) {
            const auto& cell = table.rows[r][c];
            const auto dot = cell.find('.');
            if (dot != std::string::npos && cell.size() - dot - 1 == 3) ++cells;
        }
    }
    bool same = run.manifest.artifacts.size() == run.repeat.artifacts.size();
    for (std::size_t i = 0; same && i < run.manifest.artifacts.size(); ++i) {
        same = run.manifest.artifacts[i].file == run.repeat.artifacts[i].file &&
               run.manifest.artifacts[i].sha256 == run.repeat.artifacts[i].sha256;
    }
    return {shape && cells == 40 && same, std::to_string(cells) + "/40 values with 3 decimals in a 5x4 grid, " +
                                             std::to_string(run.manifest.artifacts.size()) + " artifact checksums " +
                                             (same ? "identical" : "DIFFER") + " across two runs"};
}

// 12 --------------------------------------------------------------------------

Outcome pca(const ShippedRun& run) {
    std::mt19937_64 rng(1012);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = normal_matrix(rng, 20, 6);
        const Matrix p = pca_transform(x, pca_fit(x, 6));
        for (std::size_t i = 0; i < 20; ++i)
            for (std::size_t j = i + 1; j < 20; ++j)
                worst = std::max(worst, std::fabs(oracle::euclid(x, i, j) - oracle::euclid(p, i, j)));
    }
    Matrix line(3, 2);
    for (std::size_t i = 0; i < 3; ++i) line(i, 0) = line(i, 1) = static_cast<double>(i + 1);
    const double ratio = pca_fit(line, 1).explained_ratio[0];

    const auto config = shipped_config();
    const auto lstm = features_from_csv(csv::read_file(run.out / "features_lstm.csv"));
    const auto dtw = features_from_csv(csv::read_file(run.out / "features_dtw.csv"));
    const auto demo = features_from_csv(csv::read_file(run.out / "features_demographic.csv"));
    const auto hybrid = assemble_hybrid(lstm, dtw, demo, config.hybrid);
    HybridSpec post = config.hybrid;
    post.reduction = Reduction::PostConcatenation;
    const auto hybrid_post = assemble_hybrid(lstm, dtw, demo, post);
    const std::size_t expected = lstm.cols() + dtw.cols() + demo.cols();
    const bool width = hybrid.concatenated_width == expected && hybrid_post.concatenated_width == expected;
    const bool pass = worst <= 1e-9 && std::fabs(ratio - 1.0) <= 1e-12 && width;
    return {pass, fmt("max distance error %.2e, collinear ratio %.15f, ", worst, ratio) + "hybrid width " +
                      std::to_string(hybrid.concatenated_width) + " = " + std::to_string(lstm.cols()) + "+" +
                      std::to_string(dtw.cols()) + "+" + std::to_string(demo.cols())};
}

}  // namespace

int main() {
    report(1, "DTW matches exhaustive warp-path enumeration on 500 pairs", dtw_oracle);
    report(2, "DTW hand cases", dtw_hand);
    report(3, "300-customer DTW distance matrix", distance_matrix);
    report(4, "gradient check and forget-gate mutation", gradient);
    report(5, "teacher-forcing construction for every synthetic customer", teacher_forcing);
    report(6, "copy task training sanity and determinism", copy_task);
    report(7, "silhouette and Davies-Bouldin against direct formulas", metric_oracles);
    report(8, "k-means optimality on 50 small instances", kmeans_optimality);

    ShippedRun run;
    std::string run_error;
    try {
        run = run_shipped();
    } catch (const std::exception& e) {
        run_error = e.what();
    }
    auto needs_run = [&](const std::function<Outcome(const ShippedRun&)>& f) {
        return [&, f]() -> Outcome {
            if (!run_error.empty()) return {false, "shipped pipeline failed: " + run_error};
            return f(run);
        };
    };
    report(9, "elbow selection", needs_run(elbow));
    report(10, "planted-cluster recovery with hybrid features", needs_run(recovery));
    report(11, "metrics grid layout and checksum determinism", needs_run(report_structure));
    report(12, "PCA distance preservation, collinear variance, hybrid width", needs_run(pca));

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
