#include "custseg/csv.hpp"
#include "custseg/error.hpp"
#include "custseg/pipeline.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>

namespace custseg {

using json = nlohmann::json;

namespace {

std::string display_name(const std::string& method) {
    if (method == "lstm") return "LSTM";
    if (method == "dtw") return "DTW";
    if (method == "rfm") return "RFM";
    if (method == "hybrid") return "Hybrid";
    return method;
}

// Pads to `width` display columns; the dash counts as one column.
std::string pad(const std::string& text, std::size_t width) {
    std::size_t shown = 0;
    for (unsigned char ch : text) {
        if ((ch & 0xC0) != 0x80) ++shown;
    }
    return shown >= width ? text : text + std::string(width - shown, ' ');
}

constexpr const char* kDash = "\xE2\x80\x94";

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::vector<ArtifactEntry> scan_artifacts(const std::filesystem::path& dir) {
    std::vector<ArtifactEntry> out;
    if (!std::filesystem::exists(dir)) return out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        const std::string bytes = csv::read_file(entry.path());
        out.push_back({rel, sha256_hex(bytes), bytes.size()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
    return out;
}

std::string manifest_to_json(const RunManifest& m) {
    json root;
    root["format"] = "custseg-manifest";
    root["version"] = m.version;
    root["seed"] = m.seed;
    root["status"] = m.failed ? "FAILED" : "ok";
    if (m.failed) {
        root["failed_stage"] = m.failed_stage;
        root["error"] = m.error;
    }
    root["config"] = m.config_json.empty() ? json::object() : json::parse(m.config_json);
    json stages = json::array();
    for (const auto& s : m.stages) stages.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    root["stages"] = stages;
    json files = json::array();
    for (const auto& a : m.artifacts) files.push_back({{"file", a.file}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    root["artifacts"] = files;
    root["elbow_k"] = m.elbow_k;
    root["headline_method"] = m.headline_method;
    return root.dump(2) + "\n";
}

BestCells best_cells(const MetricsReport& report, const std::string& method) {
    BestCells best;
    double sc = 0.0, dbi = 0.0;
    for (std::size_t k : report.ks) {
        const MetricsCell* cell = report.find(method, k);
        if (!cell) continue;
        if (cell->silhouette && (!best.silhouette_k || *cell->silhouette > sc)) {
            sc = *cell->silhouette;
            best.silhouette_k = k;
        }
        if (cell->davies_bouldin && (!best.davies_bouldin_k || *cell->davies_bouldin < dbi)) {
            dbi = *cell->davies_bouldin;
            best.davies_bouldin_k = k;
        }
    }
    return best;
}

std::string metrics_to_csv(const MetricsReport& report) {
    std::vector<std::string> header{"k"};
    for (const auto& m : report.methods) {
        header.push_back(m + "_SC");
        header.push_back(m + "_DBI");
    }
    std::string out = csv::join(header) + "\n";
    for (std::size_t k : report.ks) {
        std::vector<std::string> row{std::to_string(k)};
        for (const auto& m : report.methods) {
            const MetricsCell* cell = report.find(m, k);
            row.push_back(cell && cell->silhouette ? csv::format_fixed(*cell->silhouette, 3) : "");
            row.push_back(cell && cell->davies_bouldin ? csv::format_fixed(*cell->davies_bouldin, 3) : "");
        }
        out += csv::join(row) + "\n";
    }
    return out;
}

std::string metrics_to_json(const MetricsReport& report) {
    json root;
    root["methods"] = report.methods;
    root["ks"] = report.ks;
    json cells = json::array();
    for (const auto& c : report.cells) {
        json cell{{"method", c.method}, {"k", c.k}};
        cell["sc"] = c.silhouette ? json(*c.silhouette) : json(nullptr);
        cell["dbi"] = c.davies_bouldin ? json(*c.davies_bouldin) : json(nullptr);
        if (!c.reason.empty()) cell["reason"] = c.reason;
        cells.push_back(cell);
    }
    root["cells"] = cells;
    json best = json::object();
    for (const auto& m : report.methods) {
        const auto b = best_cells(report, m);
        best[m] = {{"sc_k", b.silhouette_k ? json(*b.silhouette_k) : json(nullptr)},
                   {"dbi_k", b.davies_bouldin_k ? json(*b.davies_bouldin_k) : json(nullptr)}};
    }
    root["best"] = best;
    return root.dump(2) + "\n";
}

std::string format_report(const MetricsReport& report) {
    constexpr std::size_t kCell = 9;
    std::string out = "K-means clustering results (SC: higher is better, DBI: lower is better)\n\n";
    out += pad("", 4);
    for (const auto& m : report.methods) out += pad(display_name(m), 2 * kCell);
    out += "\n" + pad("k", 4);
    for (std::size_t i = 0; i < report.methods.size(); ++i) out += pad("SC", kCell) + pad("DBI", kCell);
    out += "\n";

    std::vector<std::string> notes;
    for (std::size_t k : report.ks) {
        out += pad(std::to_string(k), 4);
        for (const auto& m : report.methods) {
            const MetricsCell* cell = report.find(m, k);
            const auto best = best_cells(report, m);
            auto render = [&](const std::optional<double>& v, const std::optional<std::size_t>& best_k) {
                if (!v) return std::string(kDash);
                return csv::format_fixed(*v, 3) + (best_k && *best_k == k ? "*" : "");
            };
            std::string sc = render(cell ? cell->silhouette : std::nullopt, best.silhouette_k);
            std::string dbi = render(cell ? cell->davies_bouldin : std::nullopt, best.davies_bouldin_k);
            if (!cell || !cell->silhouette || !cell->davies_bouldin) {
                notes.push_back(m + " k=" + std::to_string(k) + ": " +
                                (cell && !cell->reason.empty() ? cell->reason : std::string("not computed")));
                const std::string mark = "[" + std::to_string(notes.size()) + "]";
                if (!cell || !cell->silhouette) sc += mark;
                if (!cell || !cell->davies_bouldin) dbi += mark;
            }
            out += pad(sc, kCell) + pad(dbi, kCell);
        }
        out += "\n";
    }
    out += "\n* best cell per method (max SC, min DBI)\n";
    for (std::size_t i = 0; i < notes.size(); ++i) out += "[" + std::to_string(i + 1) + "] " + notes[i] + "\n";

    std::string trimmed;
    std::size_t start = 0;
    while (start < out.size()) {
        const std::size_t end = out.find('\n', start);
        std::string line = out.substr(start, end - start);
        line.erase(line.find_last_not_of(' ') + 1);
        trimmed += line + "\n";
        start = end + 1;
    }
    return trimmed;
}

void emit_report(const RunManifest& manifest, const MetricsReport& metrics, const std::filesystem::path& dir) {
    std::string text = "custseg " + manifest.version + ", seed " + std::to_string(manifest.seed) + "\n";
    if (!manifest.elbow_k.empty()) {
        text += "elbow k:";
        for (const auto& [method, k] : manifest.elbow_k) text += " " + method + "=" + std::to_string(k);
        text += "\n";
    }
    text += "\n" + format_report(metrics);
    csv::write_file(dir / "report.txt", text);
    csv::write_file(dir / "metrics.csv", metrics_to_csv(metrics));
    csv::write_file(dir / "metrics.json", metrics_to_json(metrics));
}

std::string assignments_to_csv(const std::vector<std::string>& ids, const std::vector<std::size_t>& clusters) {
    if (ids.size() != clusters.size()) throw InputError("assignments: id count does not match cluster count");
    std::string out = "customer_id,cluster\n";
    for (std::size_t i = 0; i < ids.size(); ++i) out += ids[i] + "," + std::to_string(clusters[i]) + "\n";
    return out;
}

std::string elbow_to_csv(const std::map<std::string, ElbowResult>& elbows) {
    std::string out = "method,k,inertia,selected\n";
    for (const auto& [method, e] : elbows) {
        for (std::size_t i = 0; i < e.ks.size(); ++i) {
            out += csv::join({method, std::to_string(e.ks[i]), csv::format(e.inertias[i]),
                              e.ks[i] == e.best_k ? "1" : "0"}) +
                   "\n";
        }
    }
    return out;
}

}  // namespace custseg
