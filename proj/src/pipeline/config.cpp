#include "custseg/error.hpp"
#include "custseg/json_io.hpp"
#include "custseg/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <set>

namespace custseg {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kMethods{"lstm", "dtw", "rfm", "hybrid"};

template <class T>
void read(const json& o, const char* key, T& out, std::string_view ctx) {
    if (!o.contains(key)) return;
    try {
        out = o.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(ctx) + ": bad value for '" + key + "'");
    }
}

std::pair<std::size_t, std::size_t> read_range(const json& v, std::string_view ctx) {
    if (v.is_string()) return parse_k_range(v.get<std::string>());
    if (v.is_array() && v.size() == 2 && v[0].is_number_unsigned() && v[1].is_number_unsigned()) {
        return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
    }
    throw ConfigError(std::string(ctx) + ": expected [lo, hi] or \"lo..hi\"");
}

std::filesystem::path resolve(const json& o, const char* key, const std::filesystem::path& base) {
    std::string text;
    read(o, key, text, "data");
    if (text.empty()) return {};
    std::filesystem::path p(text);
    return p.is_relative() && !base.empty() ? base / p : p;
}

SegmentRegime regime_from_json(const json& o) {
    constexpr std::string_view ctx = "synth.regimes";
    require_known_keys(o,
                       {"name", "mean_amount", "amount_spread", "min_transactions", "max_transactions",
                        "mean_interval_days", "credit_probability", "mean_age", "home_city"},
                       ctx);
    SegmentRegime r;
    read(o, "name", r.name, ctx);
    read(o, "mean_amount", r.mean_amount, ctx);
    read(o, "amount_spread", r.amount_spread, ctx);
    read(o, "min_transactions", r.min_transactions, ctx);
    read(o, "max_transactions", r.max_transactions, ctx);
    read(o, "mean_interval_days", r.mean_interval_days, ctx);
    read(o, "credit_probability", r.credit_probability, ctx);
    read(o, "mean_age", r.mean_age, ctx);
    read(o, "home_city", r.home_city, ctx);
    return r;
}

json regime_to_json(const SegmentRegime& r) {
    return {{"name", r.name},
            {"mean_amount", r.mean_amount},
            {"amount_spread", r.amount_spread},
            {"min_transactions", r.min_transactions},
            {"max_transactions", r.max_transactions},
            {"mean_interval_days", r.mean_interval_days},
            {"credit_probability", r.credit_probability},
            {"mean_age", r.mean_age},
            {"home_city", r.home_city}};
}

}  // namespace

std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : stage) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return seed + h;
}

std::vector<std::size_t> k_values(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> ks;
    for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
    return ks;
}

std::pair<std::size_t, std::size_t> parse_k_range(std::string_view text) {
    auto number = [&](std::string_view s) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            throw ConfigError("bad k range '" + std::string(text) + "'");
        }
        return v;
    };
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const std::size_t k = number(text);
        return {k, k};
    }
    const std::size_t lo = number(text.substr(0, dots));
    const std::size_t hi = number(text.substr(dots + 2));
    if (lo > hi) throw ConfigError("bad k range '" + std::string(text) + "': lower bound exceeds upper bound");
    return {lo, hi};
}

std::vector<std::string> parse_methods(std::string_view list) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const auto end = comma == std::string_view::npos ? list.size() : comma;
        std::string item(list.substr(start, end - start));
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

PipelineConfig parse_pipeline_config(std::string_view text, const std::filesystem::path& base) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_known_keys(root,
                       {"seed", "out", "threads", "methods", "data", "synth", "preprocess", "dtw", "rfm", "train",
                        "hybrid", "cluster"},
                       "config");
    PipelineConfig c;
    read(root, "seed", c.seed, "config");
    std::string out;
    read(root, "out", out, "config");
    if (!out.empty()) c.out = out;
    read(root, "threads", c.threads, "config");
    read(root, "methods", c.methods, "config");

    if (root.contains("data")) {
        const auto& d = root.at("data");
        require_known_keys(d, {"transactions", "customers", "labels"}, "data");
        DataPaths paths{resolve(d, "transactions", base), resolve(d, "customers", base), resolve(d, "labels", base)};
        if (paths.transactions.empty() || paths.customers.empty()) {
            throw ConfigError("data: 'transactions' and 'customers' are both required");
        }
        c.data = paths;
    }
    if (root.contains("synth")) {
        const auto& s = root.at("synth");
        require_known_keys(s, {"customers", "segments", "regimes"}, "synth");
        read(s, "customers", c.synth.customers, "synth");
        read(s, "segments", c.synth.segments, "synth");
        if (s.contains("regimes")) {
            if (!s.at("regimes").is_array()) throw ConfigError("synth: 'regimes' must be an array");
            for (const auto& r : s.at("regimes")) c.synth.regimes.push_back(regime_from_json(r));
        }
    }
    if (root.contains("preprocess")) {
        const auto& p = root.at("preprocess");
        require_known_keys(p, {"normalize"}, "preprocess");
        read(p, "normalize", c.normalize, "preprocess");
    }
    if (root.contains("dtw")) {
        const auto& d = root.at("dtw");
        require_known_keys(d, {"mode", "normalize"}, "dtw");
        std::string mode = "amount";
        read(d, "mode", mode, "dtw");
        if (mode == "amount") {
            c.dtw.mode = DtwMode::AmountOnly;
        } else if (mode == "amount_time") {
            c.dtw.mode = DtwMode::AmountTime;
        } else {
            throw ConfigError("dtw: mode must be 'amount' or 'amount_time'");
        }
        read(d, "normalize", c.dtw.normalize, "dtw");
    }
    if (root.contains("rfm")) {
        const auto& r = root.at("rfm");
        require_known_keys(r, {"credits_only", "scores"}, "rfm");
        read(r, "credits_only", c.rfm.credits_only, "rfm");
        read(r, "scores", c.rfm_scores, "rfm");
    }
    if (root.contains("train")) {
        const auto& t = root.at("train");
        if (t.is_object() && t.contains("seed")) throw ConfigError("train: 'seed' is derived from the global seed");
        c.train = train_config_from_json(t);
    }
    if (root.contains("hybrid")) {
        const auto& h = root.at("hybrid");
        require_known_keys(h, {"reduction", "lstm_dims", "dtw_dims", "demo_dims", "total_dims", "variance_threshold"},
                           "hybrid");
        std::string reduction = "pre";
        read(h, "reduction", reduction, "hybrid");
        if (reduction == "pre") {
            c.hybrid.reduction = Reduction::PreConcatenation;
        } else if (reduction == "post") {
            c.hybrid.reduction = Reduction::PostConcatenation;
        } else {
            throw ConfigError("hybrid: reduction must be 'pre' or 'post'");
        }
        read(h, "lstm_dims", c.hybrid.lstm_dims, "hybrid");
        read(h, "dtw_dims", c.hybrid.dtw_dims, "hybrid");
        read(h, "demo_dims", c.hybrid.demo_dims, "hybrid");
        read(h, "total_dims", c.hybrid.total_dims, "hybrid");
        read(h, "variance_threshold", c.hybrid.variance_threshold, "hybrid");
    }
    if (root.contains("cluster")) {
        const auto& k = root.at("cluster");
        require_known_keys(k, {"k_range", "elbow_range", "restarts"}, "cluster");
        if (k.contains("k_range")) std::tie(c.cluster.k_min, c.cluster.k_max) = read_range(k.at("k_range"), "cluster.k_range");
        if (k.contains("elbow_range")) {
            std::tie(c.cluster.elbow_min, c.cluster.elbow_max) = read_range(k.at("elbow_range"), "cluster.elbow_range");
        }
        read(k, "restarts", c.cluster.restarts, "cluster");
    }
    validate(c);
    return c;
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
    json root;
    root["seed"] = c.seed;
    root["out"] = c.out.string();
    root["threads"] = c.threads;
    root["methods"] = c.methods;
    if (c.data) {
        root["data"] = {{"transactions", c.data->transactions.string()},
                        {"customers", c.data->customers.string()},
                        {"labels", c.data->labels.string()}};
    } else {
        json regimes = json::array();
        for (const auto& r : c.synth.regimes) regimes.push_back(regime_to_json(r));
        root["synth"] = {{"customers", c.synth.customers}, {"segments", c.synth.segments}, {"regimes", regimes}};
    }
    root["preprocess"] = {{"normalize", c.normalize}};
    root["dtw"] = {{"mode", c.dtw.mode == DtwMode::AmountOnly ? "amount" : "amount_time"},
                   {"normalize", c.dtw.normalize}};
    root["rfm"] = {{"credits_only", c.rfm.credits_only}, {"scores", c.rfm_scores}};
    json train = to_json(c.train);
    train.erase("seed");
    root["train"] = train;
    root["hybrid"] = {{"reduction", c.hybrid.reduction == Reduction::PreConcatenation ? "pre" : "post"},
                      {"lstm_dims", c.hybrid.lstm_dims},
                      {"dtw_dims", c.hybrid.dtw_dims},
                      {"demo_dims", c.hybrid.demo_dims},
                      {"total_dims", c.hybrid.total_dims},
                      {"variance_threshold", c.hybrid.variance_threshold}};
    root["cluster"] = {{"k_range", {c.cluster.k_min, c.cluster.k_max}},
                       {"elbow_range", {c.cluster.elbow_min, c.cluster.elbow_max}},
                       {"restarts", c.cluster.restarts}};
    return root.dump(2) + "\n";
}

void validate(const PipelineConfig& c) {
    if (c.methods.empty()) throw ConfigError("methods: at least one method is required");
    std::set<std::string> seen;
    for (const auto& m : c.methods) {
        if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
            throw ConfigError("methods: unknown method '" + m + "' (expected lstm, dtw, rfm, hybrid)");
        }
        if (!seen.insert(m).second) throw ConfigError("methods: '" + m + "' listed twice");
    }
    if (c.cluster.k_min < 2 || c.cluster.k_max < c.cluster.k_min) {
        throw ConfigError("cluster: k_range must satisfy 2 <= lo <= hi");
    }
    if (c.cluster.elbow_min < 1 || c.cluster.elbow_max < c.cluster.elbow_min + 2) {
        throw ConfigError("cluster: elbow_range needs at least three k values starting at >= 1");
    }
    if (c.cluster.restarts < 1) throw ConfigError("cluster: restarts must be >= 1");
    if (!(c.hybrid.variance_threshold > 0.0 && c.hybrid.variance_threshold <= 1.0)) {
        throw ConfigError("hybrid: variance_threshold must lie in (0, 1]");
    }
    validate(c.train.model);
}

void validate(const PipelineConfig& c, const Dataset& dataset) {
    validate(c);
    const std::size_t n = dataset.customers.size();
    if (n < 3) throw ConfigError("dataset: need at least 3 customers, got " + std::to_string(n));
    if (c.cluster.k_max > n - 1) {
        throw ConfigError("cluster: k_range upper bound " + std::to_string(c.cluster.k_max) + " exceeds N - 1 = " +
                          std::to_string(n - 1));
    }
    if (c.cluster.elbow_max > n) {
        throw ConfigError("cluster: elbow_range upper bound " + std::to_string(c.cluster.elbow_max) +
                          " exceeds N = " + std::to_string(n));
    }
    const bool lstm = std::find(c.methods.begin(), c.methods.end(), "lstm") != c.methods.end() ||
                      std::find(c.methods.begin(), c.methods.end(), "hybrid") != c.methods.end();
    if (lstm) validate(c.train, dataset.max_len);
}

}  // namespace custseg
