#pragma once

// Recency / frequency / monetary summaries and quintile scores.

#include "custseg/features.hpp"
#include "custseg/ingest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace custseg {

struct RfmRaw {
    std::int64_t recency = 0;  // seconds before the dataset's latest transaction
    std::size_t frequency = 0;
    double monetary = 0.0;

    bool operator==(const RfmRaw&) const = default;
};

struct RfmScore {
    int r = 1;
    int f = 1;
    int m = 1;

    bool operator==(const RfmScore&) const = default;
};

struct RfmOptions {
    bool credits_only = false;  // monetary sums only Credit amounts
};

std::vector<RfmRaw> compute_rfm_raw(const Dataset& dataset, const RfmOptions& options = {});

/// Quintile scores in 1..5, higher is better (most recent gets r = 5).
/// A value's score is 1 + floor(5 * c / N) where c counts values strictly
/// worse than it, so ties share the lower boundary. With N < 5 the score is
/// the plain rank 1 + c.
std::vector<RfmScore> score_rfm(const std::vector<RfmRaw>& raws);

/// (r, f, m) per customer, z-scored across customers. Columns with no
/// variance pass through unscaled and are reported in `passthrough`.
FeatureMatrix rfm_features(const std::vector<RfmScore>& scores, const std::vector<std::string>& customer_ids,
                           std::vector<std::size_t>* passthrough = nullptr);

/// Same, on raw (recency, frequency, monetary) values.
FeatureMatrix rfm_raw_features(const std::vector<RfmRaw>& raws, const std::vector<std::string>& customer_ids,
                               std::vector<std::size_t>* passthrough = nullptr);

/// customer_id,recency,frequency,monetary,r,f,m
std::string rfm_to_csv(const std::vector<RfmRaw>& raws, const std::vector<RfmScore>& scores,
                       const std::vector<std::string>& customer_ids);

}  // namespace custseg
