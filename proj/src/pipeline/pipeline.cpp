#include "custseg/csv.hpp"
#include "custseg/error.hpp"
#include "custseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <unordered_map>

namespace custseg {

namespace {

bool uses(const PipelineConfig& c, std::string_view method) {
    return std::find(c.methods.begin(), c.methods.end(), method) != c.methods.end();
}

std::vector<int> read_labels(const std::filesystem::path& path, const Dataset& dataset) {
    const auto table = csv::parse(csv::read_file(path));
    const std::size_t c_id = table.column("customer_id");
    const std::size_t c_seg = table.column("segment");
    std::unordered_map<std::string, int> by_id;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        by_id[table.rows[r][c_id]] = static_cast<int>(csv::parse_int(table.rows[r][c_seg], r, "segment"));
    }
    std::vector<int> labels;
    for (const auto& p : dataset.customers) {
        const auto it = by_id.find(p.customer_id);
        if (it == by_id.end()) throw InputError("labels: no label for customer " + p.customer_id);
        labels.push_back(it->second);
    }
    return labels;
}

// Medoid by summed distance within each cluster.
std::vector<std::size_t> representatives(const Matrix& distances, const std::vector<std::size_t>& assignments,
                                         std::size_t k) {
    std::vector<std::size_t> best(k, std::numeric_limits<std::size_t>::max());
    std::vector<double> best_sum(k, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < assignments.size(); ++j) {
            if (assignments[j] == assignments[i]) sum += distances(i, j);
        }
        if (sum < best_sum[assignments[i]]) {
            best_sum[assignments[i]] = sum;
            best[assignments[i]] = i;
        }
    }
    return best;
}

Matrix scatter_coordinates(const Matrix& x) {
    Matrix out(x.rows(), 2);
    const std::size_t q = std::min<std::size_t>({2, x.cols(), x.rows() > 0 ? x.rows() - 1 : 0});
    Matrix projected;
    try {
        if (q >= 1) projected = pca_transform(x, pca_fit(x, q));
    } catch (const NumericError&) {
        projected = Matrix();
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            if (!projected.empty() && c < projected.cols()) {
                out(r, c) = projected(r, c);
            } else if (projected.empty() && c < x.cols()) {
                out(r, c) = x(r, c);
            }
        }
    }
    return out;
}

class StageRunner {
public:
    StageRunner(RunManifest& manifest, std::filesystem::path out) : manifest_(manifest), out_(std::move(out)) {}

    template <class Fn>
    void operator()(const std::string& name, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const std::exception& e) {
            record(name, start);
            manifest_.failed = true;
            manifest_.failed_stage = name;
            manifest_.error = e.what();
            finish();
            throw StageError(name, e.what());
        }
        record(name, start);
    }

    void finish() {
        manifest_.artifacts = scan_artifacts(out_);
        csv::write_file(out_ / "manifest.json", manifest_to_json(manifest_));
    }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point start) {
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest_.stages.push_back({name, seconds});
    }

    RunManifest& manifest_;
    std::filesystem::path out_;
};

}  // namespace

LoadedData load_data(const PipelineConfig& config) {
    LoadedData out;
    if (config.data) {
        const auto& paths = *config.data;
        out.transactions = parse_transactions(csv::read_file(paths.transactions));
        out.dataset = build_dataset(out.transactions, parse_customers(csv::read_file(paths.customers)));
        if (!paths.labels.empty()) out.labels = read_labels(paths.labels, out.dataset);
        return out;
    }
    SynthConfig synth = config.synth;
    synth.seed = stage_seed(config.seed, "synth");
    auto generated = generate_synthetic(synth);
    out.dataset = std::move(generated.dataset);
    out.labels = std::move(generated.labels);
    out.transactions = std::move(generated.transactions);
    out.synthetic = true;
    return out;
}

Matrix clustering_input(const FeatureMatrix& features) {
    Matrix x = features.values;
    if (features.source != FeatureSource::Hybrid) zscore_columns(x);
    return x;
}

RunManifest run_pipeline(const PipelineConfig& config) {
    validate(config);
    LoadedData data = load_data(config);
    validate(config, data.dataset);

    const Dataset& dataset = data.dataset;
    const auto ids = dataset.customer_ids();
    const auto& out = config.out;
    std::filesystem::create_directories(out);

    RunManifest manifest;
    manifest.seed = config.seed;
    manifest.config_json = pipeline_config_to_json(config);
    manifest.headline_method = uses(config, "hybrid") ? "hybrid" : config.methods.front();
    StageRunner stage(manifest, out);

    const bool need_lstm = uses(config, "lstm") || uses(config, "hybrid");
    const bool need_dtw = uses(config, "dtw") || uses(config, "hybrid");
    FeatureBundle bundle;

    stage("ingest", [&] {
        if (!data.synthetic) return;
        csv::write_file(out / "transactions.csv", serialize_transactions(data.transactions));
        csv::write_file(out / "customers.csv", serialize_customers(dataset.customers));
        if (data.labels) csv::write_file(out / "labels.csv", serialize_labels(dataset, *data.labels));
    });

    PaddedSequenceBatch batch;
    stage("preprocess", [&] {
        batch = make_padded(dataset);
        if (config.normalize) batch = apply_zscore(batch, fit_zscore(batch));
    });

    if (need_lstm) {
        stage("lstm", [&] {
            TrainConfig train_cfg = config.train;
            train_cfg.seed = stage_seed(config.seed, "lstm");
            bundle.training = train(batch, train_cfg);
            save_checkpoint(out / "model.json", bundle.training->model, train_cfg);
            csv::write_file(out / "loss.csv", losses_to_csv(bundle.training->losses));
            auto f = extract_features(batch, bundle.training->model, ids, config.threads);
            csv::write_file(out / "features_lstm.csv", features_to_csv(f));
            bundle.features.emplace("lstm", std::move(f));
        });
    }

    if (need_dtw) {
        stage("dtw", [&] {
            bundle.dtw = dtw_matrix(dtw_series(dataset, config.dtw), ids, config.threads);
            auto f = dtw_features(*bundle.dtw);
            csv::write_file(out / "features_dtw.csv", features_to_csv(f));
            bundle.features.emplace("dtw", std::move(f));
        });
    }

    if (uses(config, "rfm")) {
        stage("rfm", [&] {
            bundle.rfm_raw = compute_rfm_raw(dataset, config.rfm);
            bundle.rfm_scores = score_rfm(bundle.rfm_raw);
            csv::write_file(out / "rfm.csv", rfm_to_csv(bundle.rfm_raw, bundle.rfm_scores, ids));
            auto f = config.rfm_scores ? rfm_features(bundle.rfm_scores, ids) : rfm_raw_features(bundle.rfm_raw, ids);
            csv::write_file(out / "features_rfm.csv", features_to_csv(f));
            bundle.features.emplace("rfm", std::move(f));
        });
    }

    if (uses(config, "hybrid")) {
        stage("hybrid", [&] {
            const auto demo = demographic_features(dataset);
            csv::write_file(out / "features_demographic.csv", features_to_csv(demo));
            bundle.hybrid = assemble_hybrid(bundle.features.at("lstm"), bundle.features.at("dtw"), demo, config.hybrid);
            csv::write_file(out / "features_hybrid.csv", features_to_csv(bundle.hybrid->features));
            bundle.features.emplace("hybrid", bundle.hybrid->features);
        });
    }

    std::map<std::string, KMeansModel> chosen;
    stage("cluster", [&] {
        std::map<std::string, ElbowResult> elbows;
        const auto ks = k_values(config.cluster.elbow_min, config.cluster.elbow_max);
        for (const auto& method : config.methods) {
            const Matrix x = clustering_input(bundle.features.at(method));
            const std::uint64_t seed = stage_seed(config.seed, "cluster:" + method);
            auto elbow = elbow_select(x, ks, seed, config.cluster.restarts);
            const std::size_t k = std::max<std::size_t>(2, elbow.best_k);
            manifest.elbow_k[method] = elbow.best_k;
            auto model = kmeans_fit_best(x, k, seed, config.cluster.restarts);
            csv::write_file(out / ("assignments_" + method + ".csv"), assignments_to_csv(ids, model.assignments));
            if (method == manifest.headline_method) {
                csv::write_file(out / "assignments.csv", assignments_to_csv(ids, model.assignments));
            }
            elbows.emplace(method, std::move(elbow));
            chosen.emplace(method, std::move(model));
        }
        csv::write_file(out / "elbow.csv", elbow_to_csv(elbows));
    });

    stage("evaluate", [&] {
        std::vector<std::pair<std::string, FeatureMatrix>> sets;
        for (const auto& method : config.methods) {
            FeatureMatrix f = bundle.features.at(method);
            f.values = clustering_input(f);
            sets.emplace_back(method, std::move(f));
        }
        const auto report = evaluate_grid(sets, k_values(config.cluster.k_min, config.cluster.k_max),
                                          stage_seed(config.seed, "evaluate"), config.cluster.restarts);
        emit_report(manifest, report, out);
    });

    stage("plotdata", [&] {
        if (bundle.dtw && bundle.features.count("dtw")) {
            const Matrix x = clustering_input(bundle.features.at("dtw"));
            const std::size_t k = std::min<std::size_t>(3, x.rows());
            const auto model = kmeans_fit_best(x, k, stage_seed(config.seed, "plot:dtw"), config.cluster.restarts);
            const auto reps = representatives(bundle.dtw->values, model.assignments, k);
            std::string text = "cluster,customer_id,step,timestamp,amount,balance,type\n";
            for (std::size_t c = 0; c < k; ++c) {
                const auto& seq = dataset.sequences[reps[c]];
                for (std::size_t t = 0; t < seq.records.size(); ++t) {
                    const auto& r = seq.records[t];
                    text += csv::join({std::to_string(c), seq.customer_id, std::to_string(t), std::to_string(r.timestamp),
                                       csv::format(r.amount), csv::format(r.balance),
                                       std::to_string(static_cast<int>(r.type))}) +
                            "\n";
                }
            }
            csv::write_file(out / "plotdata_series.csv", text);
        }
        for (const auto& method : config.methods) {
            const Matrix xy = scatter_coordinates(clustering_input(bundle.features.at(method)));
            const auto& assign = chosen.at(method).assignments;
            std::string text = "customer_id,cluster,pc1,pc2\n";
            for (std::size_t i = 0; i < ids.size(); ++i) {
                text += csv::join({ids[i], std::to_string(assign[i]), csv::format(xy(i, 0)), csv::format(xy(i, 1))}) +
                        "\n";
            }
            csv::write_file(out / ("plotdata_pca_" + method + ".csv"), text);
        }
    });

    stage.finish();
    return manifest;
}

}  // namespace custseg
