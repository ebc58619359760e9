#pragma once

// Padded per-customer transaction tensors, z-score normalization, and the
// SOS/EOS teacher-forcing pairs consumed by the sequence autoencoder.

#include "custseg/ingest.hpp"
#include "custseg/matrix.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace custseg {

/// Per-transaction feature columns, in tensor order.
enum Feature : std::size_t { kType = 0, kAmount = 1, kBalance = 2, kTimestamp = 3 };
inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames{"type", "amount", "balance", "timestamp"};

inline constexpr double kSosValue = -1.0;
inline constexpr double kEosValue = -2.0;

/// customers x max_len x 4 tensor. Rows at t >= lengths[n] are all-zero.
class PaddedSequenceBatch {
public:
    PaddedSequenceBatch() = default;
    PaddedSequenceBatch(std::vector<std::size_t> lengths, std::size_t max_len);

    std::size_t customers() const noexcept { return lengths_.size(); }
    std::size_t max_len() const noexcept { return max_len_; }
    std::size_t length(std::size_t n) const { return lengths_[n]; }
    const std::vector<std::size_t>& lengths() const noexcept { return lengths_; }

    std::span<double, kFeatureCount> row(std::size_t n, std::size_t t) {
        return std::span<double, kFeatureCount>(values_.data() + offset(n, t), kFeatureCount);
    }
    std::span<const double, kFeatureCount> row(std::size_t n, std::size_t t) const {
        return std::span<const double, kFeatureCount>(values_.data() + offset(n, t), kFeatureCount);
    }
    /// The `length(n)` real rows of customer n, row-major.
    std::span<const double> real_rows(std::size_t n) const {
        return {values_.data() + offset(n, 0), lengths_[n] * kFeatureCount};
    }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const PaddedSequenceBatch&) const = default;

private:
    std::size_t offset(std::size_t n, std::size_t t) const { return (n * max_len_ + t) * kFeatureCount; }

    std::size_t max_len_ = 0;
    std::vector<std::size_t> lengths_;
    std::vector<double> values_;
};

/// Raw (type, amount, balance, timestamp) rows, zero-padded to max_len.
PaddedSequenceBatch make_padded(const Dataset& dataset);

struct ZScoreParams {
    std::array<double, kFeatureCount> mu{};
    std::array<double, kFeatureCount> sigma{};
};

/// Population mean and standard deviation over real rows only.
/// Throws InputError with fewer than two real rows and NumericError when a
/// feature is constant.
ZScoreParams fit_zscore(const PaddedSequenceBatch& batch);
PaddedSequenceBatch apply_zscore(const PaddedSequenceBatch& batch, const ZScoreParams& params);
PaddedSequenceBatch invert_zscore(const PaddedSequenceBatch& batch, const ZScoreParams& params);

/// decoder_input  = [SOS; x_0 .. x_{L-1}; 0 ...]
/// decoder_target = [x_0 .. x_{L-1}; EOS; 0 ...]
/// Both have max_len + 1 rows of width 4.
struct TeacherForcingPair {
    Matrix decoder_input;
    Matrix decoder_target;
    std::size_t length = 0;
};

std::vector<TeacherForcingPair> make_teacher_pairs(const PaddedSequenceBatch& batch);

/// Debug dump: customer_id,step,type,amount,balance,timestamp for every row
/// including padding.
std::string padded_to_csv(const PaddedSequenceBatch& batch, const std::vector<std::string>& customer_ids);

}  // namespace custseg
