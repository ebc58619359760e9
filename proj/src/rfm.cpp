#include "custseg/rfm.hpp"

#include "custseg/csv.hpp"
#include "custseg/error.hpp"

#include <algorithm>
#include <limits>

namespace custseg {

std::vector<RfmRaw> compute_rfm_raw(const Dataset& dataset, const RfmOptions& options) {
    std::int64_t reference = std::numeric_limits<std::int64_t>::min();
    for (const auto& seq : dataset.sequences) {
        for (const auto& rec : seq.records) reference = std::max(reference, rec.timestamp);
    }
    std::vector<RfmRaw> out;
    out.reserve(dataset.sequences.size());
    for (const auto& seq : dataset.sequences) {
        if (seq.records.empty()) throw InputError("RFM: customer " + seq.customer_id + " has no transactions");
        RfmRaw raw;
        std::int64_t last = seq.records.front().timestamp;
        for (const auto& rec : seq.records) {
            last = std::max(last, rec.timestamp);
            if (!options.credits_only || rec.type == TxType::Credit) raw.monetary += rec.amount;
        }
        raw.recency = reference - last;
        raw.frequency = seq.records.size();
        out.push_back(raw);
    }
    return out;
}

namespace {

// Scores from the count of strictly worse values; `worse(a, b)` is a strict order.
template <class T, class Worse>
std::vector<int> quintile_scores(const std::vector<T>& values, Worse worse) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return worse(values[a], values[b]); });

    std::vector<int> scores(n);
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && !worse(values[order[start]], values[order[end]])) ++end;
        // `start` values are strictly worse than every member of this tie group.
        const int score = n < 5 ? static_cast<int>(start) + 1 : 1 + static_cast<int>((5 * start) / n);
        for (std::size_t k = start; k < end; ++k) scores[order[k]] = score;
        start = end;
    }
    return scores;
}

FeatureMatrix zscored(Matrix values, const std::vector<std::string>& ids, std::vector<std::size_t>* passthrough) {
    if (ids.size() != values.rows()) throw InputError("RFM: customer id count does not match rows");
    std::vector<std::size_t> degenerate;
    if (values.rows() >= 2) {
        // Degenerate columns keep their raw values.
        Matrix scaled = values;
        degenerate = zscore_columns(scaled);
        for (std::size_t r = 0; r < values.rows(); ++r) {
            for (std::size_t c = 0; c < values.cols(); ++c) {
                if (std::find(degenerate.begin(), degenerate.end(), c) == degenerate.end()) values(r, c) = scaled(r, c);
            }
        }
    } else {
        for (std::size_t c = 0; c < values.cols(); ++c) degenerate.push_back(c);
    }
    if (passthrough) *passthrough = degenerate;
    return FeatureMatrix{std::move(values), ids, FeatureSource::Rfm};
}

}  // namespace

std::vector<RfmScore> score_rfm(const std::vector<RfmRaw>& raws) {
    std::vector<std::int64_t> recency;
    std::vector<std::size_t> frequency;
    std::vector<double> monetary;
    for (const auto& r : raws) {
        recency.push_back(r.recency);
        frequency.push_back(r.frequency);
        monetary.push_back(r.monetary);
    }
    // Larger recency is worse.
    const auto r = quintile_scores(recency, [](std::int64_t a, std::int64_t b) { return a > b; });
    const auto f = quintile_scores(frequency, [](std::size_t a, std::size_t b) { return a < b; });
    const auto m = quintile_scores(monetary, [](double a, double b) { return a < b; });
    std::vector<RfmScore> out(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) out[i] = RfmScore{r[i], f[i], m[i]};
    return out;
}

FeatureMatrix rfm_features(const std::vector<RfmScore>& scores, const std::vector<std::string>& customer_ids,
                           std::vector<std::size_t>* passthrough) {
    Matrix values(scores.size(), 3);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        values(i, 0) = scores[i].r;
        values(i, 1) = scores[i].f;
        values(i, 2) = scores[i].m;
    }
    return zscored(std::move(values), customer_ids, passthrough);
}

FeatureMatrix rfm_raw_features(const std::vector<RfmRaw>& raws, const std::vector<std::string>& customer_ids,
                               std::vector<std::size_t>* passthrough) {
    Matrix values(raws.size(), 3);
    for (std::size_t i = 0; i < raws.size(); ++i) {
        values(i, 0) = static_cast<double>(raws[i].recency);
        values(i, 1) = static_cast<double>(raws[i].frequency);
        values(i, 2) = raws[i].monetary;
    }
    return zscored(std::move(values), customer_ids, passthrough);
}

std::string rfm_to_csv(const std::vector<RfmRaw>& raws, const std::vector<RfmScore>& scores,
                       const std::vector<std::string>& customer_ids) {
    std::string out = "customer_id,recency,frequency,monetary,r,f,m\n";
    for (std::size_t i = 0; i < raws.size(); ++i) {
        out += csv::join({customer_ids.at(i), std::to_string(raws[i].recency), std::to_string(raws[i].frequency),
                          csv::format(raws[i].monetary), std::to_string(scores.at(i).r), std::to_string(scores[i].f),
                          std::to_string(scores[i].m)});
        out.push_back('\n');
    }
    return out;
}

}  // namespace custseg
