#include "custseg/preprocess.hpp"

#include "custseg/csv.hpp"
#include "custseg/error.hpp"

#include <algorithm>
#include <cmath>

namespace custseg {

PaddedSequenceBatch::PaddedSequenceBatch(std::vector<std::size_t> lengths, std::size_t max_len)
    : max_len_(max_len), lengths_(std::move(lengths)), values_(lengths_.size() * max_len * kFeatureCount, 0.0) {
    for (std::size_t len : lengths_) {
        if (len > max_len_) throw InputError("sequence length exceeds max_len");
    }
}

PaddedSequenceBatch make_padded(const Dataset& dataset) {
    std::vector<std::size_t> lengths;
    lengths.reserve(dataset.sequences.size());
    std::size_t max_len = 0;
    for (const auto& seq : dataset.sequences) {
        lengths.push_back(seq.length());
        max_len = std::max(max_len, seq.length());
    }
    PaddedSequenceBatch batch(std::move(lengths), max_len);
    for (std::size_t n = 0; n < dataset.sequences.size(); ++n) {
        const auto& recs = dataset.sequences[n].records;
        for (std::size_t t = 0; t < recs.size(); ++t) {
            auto r = batch.row(n, t);
            r[kType] = encode(recs[t].type);
            r[kAmount] = recs[t].amount;
            r[kBalance] = recs[t].balance;
            r[kTimestamp] = static_cast<double>(recs[t].timestamp);
        }
    }
    return batch;
}

ZScoreParams fit_zscore(const PaddedSequenceBatch& batch) {
    std::size_t count = 0;
    for (std::size_t len : batch.lengths()) count += len;
    if (count < 2) throw InputError("z-score fit needs at least two real rows");

    ZScoreParams p;
    for (std::size_t n = 0; n < batch.customers(); ++n) {
        for (std::size_t t = 0; t < batch.length(n); ++t) {
            const auto r = batch.row(n, t);
            for (std::size_t f = 0; f < kFeatureCount; ++f) p.mu[f] += r[f];
        }
    }
    for (double& m : p.mu) m /= static_cast<double>(count);

    std::array<double, kFeatureCount> ss{};
    for (std::size_t n = 0; n < batch.customers(); ++n) {
        for (std::size_t t = 0; t < batch.length(n); ++t) {
            const auto r = batch.row(n, t);
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                const double d = r[f] - p.mu[f];
                ss[f] += d * d;
            }
        }
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        p.sigma[f] = std::sqrt(ss[f] / static_cast<double>(count));
        // Relative floor: a constant column can leave rounding residue.
        if (!(p.sigma[f] > 1e-12 * std::max(1.0, std::fabs(p.mu[f])))) {
            throw NumericError(std::string("degenerate feature '") + kFeatureNames[f] + "': constant across all rows");
        }
    }
    return p;
}

PaddedSequenceBatch apply_zscore(const PaddedSequenceBatch& batch, const ZScoreParams& params) {
    PaddedSequenceBatch out = batch;
    for (std::size_t n = 0; n < out.customers(); ++n) {
        for (std::size_t t = 0; t < out.length(n); ++t) {
            auto r = out.row(n, t);
            for (std::size_t f = 0; f < kFeatureCount; ++f) r[f] = (r[f] - params.mu[f]) / params.sigma[f];
        }
    }
    return out;
}

PaddedSequenceBatch invert_zscore(const PaddedSequenceBatch& batch, const ZScoreParams& params) {
    PaddedSequenceBatch out = batch;
    for (std::size_t n = 0; n < out.customers(); ++n) {
        for (std::size_t t = 0; t < out.length(n); ++t) {
            auto r = out.row(n, t);
            for (std::size_t f = 0; f < kFeatureCount; ++f) r[f] = r[f] * params.sigma[f] + params.mu[f];
        }
    }
    return out;
}

std::vector<TeacherForcingPair> make_teacher_pairs(const PaddedSequenceBatch& batch) {
    std::vector<TeacherForcingPair> pairs;
    pairs.reserve(batch.customers());
    const std::size_t steps = batch.max_len() + 1;
    for (std::size_t n = 0; n < batch.customers(); ++n) {
        TeacherForcingPair p{Matrix(steps, kFeatureCount), Matrix(steps, kFeatureCount), batch.length(n)};
        for (std::size_t f = 0; f < kFeatureCount; ++f) p.decoder_input(0, f) = kSosValue;
        for (std::size_t t = 0; t < p.length; ++t) {
            const auto r = batch.row(n, t);
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                p.decoder_input(t + 1, f) = r[f];
                p.decoder_target(t, f) = r[f];
            }
        }
        for (std::size_t f = 0; f < kFeatureCount; ++f) p.decoder_target(p.length, f) = kEosValue;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::string padded_to_csv(const PaddedSequenceBatch& batch, const std::vector<std::string>& customer_ids) {
    std::string out = "customer_id,step,type,amount,balance,timestamp\n";
    for (std::size_t n = 0; n < batch.customers(); ++n) {
        const std::string& id = n < customer_ids.size() ? customer_ids[n] : std::to_string(n);
        for (std::size_t t = 0; t < batch.max_len(); ++t) {
            const auto r = batch.row(n, t);
            out += csv::join({id, std::to_string(t), csv::format(r[0]), csv::format(r[1]), csv::format(r[2]),
                              csv::format(r[3])});
            out.push_back('\n');
        }
    }
    return out;
}

}  // namespace custseg
