#include "custseg/csv.hpp"
#include "custseg/error.hpp"
#include "custseg/kernels.hpp"
#include "custseg/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

using namespace custseg;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string methods;
    std::string k_range;
    std::string transactions;
    std::string customers;
    std::string labels;
};

void add_common(CLI::App* app, CommonOptions& o, bool data = true) {
    app->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", o.seed, "Global seed");
    app->add_option("--out", o.out, "Output directory");
    if (data) {
        app->add_option("--transactions", o.transactions, "Transactions CSV")->check(CLI::ExistingFile);
        app->add_option("--customers", o.customers, "Customers CSV")->check(CLI::ExistingFile);
        app->add_option("--labels", o.labels, "Planted labels CSV")->check(CLI::ExistingFile);
    }
}

PipelineConfig resolve(const CommonOptions& o) {
    PipelineConfig c;
    if (!o.config.empty()) {
        const fs::path path(o.config);
        c = parse_pipeline_config(csv::read_file(path), path.parent_path());
    }
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.out = o.out;
    if (!o.methods.empty()) c.methods = parse_methods(o.methods);
    if (!o.k_range.empty()) std::tie(c.cluster.k_min, c.cluster.k_max) = parse_k_range(o.k_range);
    if (!o.transactions.empty() || !o.customers.empty()) {
        if (o.transactions.empty() || o.customers.empty()) {
            throw ConfigError("--transactions and --customers must be given together");
        }
        c.data = DataPaths{o.transactions, o.customers, o.labels};
    }
    validate(c);
    return c;
}

PaddedSequenceBatch sequences(const PipelineConfig& c, const Dataset& d) {
    auto batch = make_padded(d);
    return c.normalize ? apply_zscore(batch, fit_zscore(batch)) : batch;
}

FeatureMatrix lstm_features(const PipelineConfig& c, const Dataset& d, const std::string& model_path) {
    const auto batch = sequences(c, d);
    if (!model_path.empty()) return extract_features(batch, load_checkpoint(model_path).model, d.customer_ids(), c.threads);
    TrainConfig t = c.train;
    t.seed = stage_seed(c.seed, "lstm");
    validate(t, d.max_len);
    const auto result = train(batch, t);
    return extract_features(batch, result.model, d.customer_ids(), c.threads);
}

FeatureMatrix dtw_method(const PipelineConfig& c, const Dataset& d) {
    return dtw_features(dtw_matrix(dtw_series(d, c.dtw), d.customer_ids(), c.threads));
}

FeatureMatrix load_or(const fs::path& path, const std::function<FeatureMatrix()>& compute) {
    if (fs::exists(path)) return features_from_csv(csv::read_file(path));
    return compute();
}

void print_summary(const LoadedData& data) {
    std::size_t tx = 0;
    for (const auto& s : data.dataset.sequences) tx += s.length();
    std::printf("customers %zu, transactions %zu, max_len %zu, dropped %zu\n", data.dataset.customers.size(), tx,
                data.dataset.max_len, data.dataset.dropped_customers);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Customer segmentation from transaction sequences"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonOptions o;
    std::size_t synth_customers = 0, synth_segments = 0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    add_common(synth, o, false);
    synth->add_option("--customers", synth_customers, "Customer count");
    synth->add_option("--segments", synth_segments, "Planted segment count");

    auto* ingest = app.add_subcommand("ingest", "Validate input tables and dump padded sequences");
    add_common(ingest, o);

    auto* train_cmd = app.add_subcommand("train", "Train the sequence autoencoder");
    add_common(train_cmd, o);

    std::string method, model_path;
    auto* features = app.add_subcommand("features", "Compute one feature matrix");
    features->add_option("method", method, "lstm, dtw, rfm, demographic or hybrid")
        ->required()
        ->check(CLI::IsMember({"lstm", "dtw", "rfm", "demographic", "hybrid"}));
    features->add_option("--model", model_path, "Checkpoint for lstm features")->check(CLI::ExistingFile);
    add_common(features, o);

    std::string features_path, elbow_range;
    std::size_t fixed_k = 0;
    auto* cluster = app.add_subcommand("cluster", "k-means on a feature matrix");
    cluster->add_option("--features", features_path, "features_<method>.csv")->required()->check(CLI::ExistingFile);
    cluster->add_option("--k", fixed_k, "Cluster count (default: elbow)");
    cluster->add_option("--elbow-range", elbow_range, "Elbow search range, e.g. 1..8");
    add_common(cluster, o, false);

    std::string features_dir;
    auto* evaluate = app.add_subcommand("evaluate", "Metrics grid over feature files");
    evaluate->add_option("--features-dir", features_dir, "Directory holding features_<method>.csv");
    evaluate->add_option("--methods", o.methods, "Comma-separated methods");
    evaluate->add_option("--k-range", o.k_range, "k range, e.g. 2..6");
    add_common(evaluate, o, false);

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage");
    add_common(pipeline, o);
    pipeline->add_option("--methods", o.methods, "Comma-separated methods");
    pipeline->add_option("--k-range", o.k_range, "k range, e.g. 2..6");

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig c = resolve(o);
        const fs::path out = c.out;

        if (synth->parsed()) {
            if (synth_customers) c.synth.customers = synth_customers;
            if (synth_segments) c.synth.segments = synth_segments;
            c.data.reset();
            const auto data = load_data(c);
            csv::write_file(out / "transactions.csv", serialize_transactions(data.transactions));
            csv::write_file(out / "customers.csv", serialize_customers(data.dataset.customers));
            csv::write_file(out / "labels.csv", serialize_labels(data.dataset, *data.labels));
            print_summary(data);
        } else if (ingest->parsed()) {
            const auto data = load_data(c);
            csv::write_file(out / "sequences.csv", padded_to_csv(make_padded(data.dataset), data.dataset.customer_ids()));
            print_summary(data);
        } else if (train_cmd->parsed()) {
            const auto data = load_data(c);
            TrainConfig t = c.train;
            t.seed = stage_seed(c.seed, "lstm");
            validate(t, data.dataset.max_len);
            const auto batch = sequences(c, data.dataset);
            const auto result = train(batch, t);
            save_checkpoint(out / "model.json", result.model, t);
            csv::write_file(out / "loss.csv", losses_to_csv(result.losses));
            csv::write_file(out / "features_lstm.csv",
                            features_to_csv(extract_features(batch, result.model, data.dataset.customer_ids(), c.threads)));
            std::printf("loss %.6f -> %.6f over %zu epochs\n", result.losses.front().train_loss,
                        result.losses.back().train_loss, result.losses.size() - 1);
        } else if (features->parsed()) {
            const auto data = load_data(c);
            const Dataset& d = data.dataset;
            FeatureMatrix f;
            if (method == "lstm") {
                f = lstm_features(c, d, model_path);
            } else if (method == "dtw") {
                f = dtw_method(c, d);
            } else if (method == "rfm") {
                const auto raw = compute_rfm_raw(d, c.rfm);
                f = c.rfm_scores ? rfm_features(score_rfm(raw), d.customer_ids()) : rfm_raw_features(raw, d.customer_ids());
            } else if (method == "demographic") {
                f = demographic_features(d);
            } else {
                const auto lstm = load_or(out / "features_lstm.csv", [&] { return lstm_features(c, d, model_path); });
                const auto dtw = load_or(out / "features_dtw.csv", [&] { return dtw_method(c, d); });
                f = assemble_hybrid(lstm, dtw, demographic_features(d), c.hybrid).features;
            }
            csv::write_file(out / ("features_" + method + ".csv"), features_to_csv(f));
            std::printf("features_%s.csv: %zu x %zu\n", method.c_str(), f.rows(), f.cols());
        } else if (cluster->parsed()) {
            const auto f = features_from_csv(csv::read_file(features_path));
            const Matrix x = clustering_input(f);
            const std::uint64_t seed = stage_seed(c.seed, "cluster:" + std::string(to_string(f.source)));
            std::size_t k = fixed_k;
            if (k == 0) {
                auto [lo, hi] = elbow_range.empty() ? std::pair{c.cluster.elbow_min, c.cluster.elbow_max}
                                                    : parse_k_range(elbow_range);
                hi = std::min(hi, x.rows());
                const auto elbow = elbow_select(x, k_values(lo, hi), seed, c.cluster.restarts);
                csv::write_file(out / "elbow.csv", elbow_to_csv({{std::string(to_string(f.source)), elbow}}));
                k = std::max<std::size_t>(2, elbow.best_k);
            }
            const auto model = kmeans_fit_best(x, k, seed, c.cluster.restarts);
            csv::write_file(out / "assignments.csv", assignments_to_csv(f.customer_ids, model.assignments));
            std::printf("k=%zu inertia=%.6f\n", k, model.inertia);
        } else if (evaluate->parsed()) {
            const fs::path dir = features_dir.empty() ? out : fs::path(features_dir);
            std::vector<std::pair<std::string, FeatureMatrix>> sets;
            for (const auto& m : c.methods) {
                FeatureMatrix f = features_from_csv(csv::read_file(dir / ("features_" + m + ".csv")));
                f.values = clustering_input(f);
                sets.emplace_back(m, std::move(f));
            }
            const auto report = evaluate_grid(sets, k_values(c.cluster.k_min, c.cluster.k_max),
                                              stage_seed(c.seed, "evaluate"), c.cluster.restarts);
            RunManifest manifest;
            manifest.seed = c.seed;
            emit_report(manifest, report, out);
            std::fputs(format_report(report).c_str(), stdout);
        } else if (pipeline->parsed()) {
            const auto manifest = run_pipeline(c);
            std::printf("kernels: %s\n", std::string(kernels::name(kernels::active().backend)).c_str());
            for (const auto& s : manifest.stages) std::printf("%-10s %8.2fs\n", s.stage.c_str(), s.seconds);
            std::printf("%zu artifacts in %s\n", manifest.artifacts.size(), out.string().c_str());
            std::fputs(csv::read_file(out / "report.txt").c_str(), stdout);
        }
    } catch (const StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
