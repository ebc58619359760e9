#pragma once

// Berka-style transaction and customer tables, per-customer sequences, and a
// schema-compatible synthetic generator.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace custseg {

/// Numeric encoding is fixed: Credit = 1, Debit = 0.
enum class TxType : int { Debit = 0, Credit = 1 };

inline double encode(TxType t) noexcept { return static_cast<double>(static_cast<int>(t)); }

struct TransactionRecord {
    std::string trans_id;
    std::string account_id;
    TxType type = TxType::Credit;
    double amount = 0.0;
    double balance = 0.0;
    std::int64_t timestamp = 0;  // unix seconds

    bool operator==(const TransactionRecord&) const = default;
};

struct CustomerProfile {
    std::string customer_id;
    std::string account_id;
    double gender = 0.0;  // 0.0 or 1.0
    int age = 1;
    double latitude = 0.0;
    double longitude = 0.0;

    bool operator==(const CustomerProfile&) const = default;
};

/// Transactions of one customer, ascending by timestamp.
struct CustomerSequence {
    std::string customer_id;
    std::vector<TransactionRecord> records;

    std::size_t length() const noexcept { return records.size(); }
};

struct Dataset {
    std::vector<CustomerProfile> customers;
    std::vector<CustomerSequence> sequences;  // sequences[i] belongs to customers[i]
    std::size_t max_len = 0;
    std::size_t dropped_customers = 0;  // profiles without any transaction

    std::size_t size() const noexcept { return customers.size(); }
    std::vector<std::string> customer_ids() const;
};

// Columns: Trans_ID, Account_ID, Type, Amount, Balance, Timestamp (any order).
std::vector<TransactionRecord> parse_transactions(std::string_view csv);
// Columns: Customer_ID, Account_ID, Gender, Age, Latitude, Longitude (any order).
std::vector<CustomerProfile> parse_customers(std::string_view csv);

std::string serialize_transactions(const std::vector<TransactionRecord>& records);
std::string serialize_customers(const std::vector<CustomerProfile>& customers);

/// Groups transactions by account into chronologically ordered customer
/// sequences. Equal timestamps keep input order. Profiles without
/// transactions are dropped and counted in `dropped_customers`.
/// Throws InputError listing orphan account ids.
Dataset build_dataset(const std::vector<TransactionRecord>& transactions,
                      const std::vector<CustomerProfile>& customers);

/// All transactions of a dataset, customer by customer.
std::vector<TransactionRecord> flatten_transactions(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Synthetic data

struct SegmentRegime {
    std::string name;
    double mean_amount = 500.0;    // mean of the log-normal amount distribution
    double amount_spread = 0.3;    // sigma of log(amount)
    std::size_t min_transactions = 10;
    std::size_t max_transactions = 20;
    double mean_interval_days = 7.0;
    double credit_probability = 0.5;
    double mean_age = 40.0;
    std::size_t home_city = 0;     // index into the built-in city table
};

struct SynthConfig {
    std::size_t customers = 300;
    std::size_t segments = 3;
    std::vector<SegmentRegime> regimes;  // empty: default_regimes(segments)
    std::uint64_t seed = 7;
};

/// Default regimes: low, middle and high spenders; the middle segment
/// transacts most often. Each has its own age and home city.
std::vector<SegmentRegime> default_regimes(std::size_t segments);

struct SyntheticDataset {
    Dataset dataset;
    std::vector<int> labels;  // planted segment per customer, aligned with dataset.customers
    std::vector<TransactionRecord> transactions;
};

/// Deterministic for a fixed seed. Balances follow
/// balance_k = balance_{k-1} + amount_k (credit) or - amount_k (debit).
/// Throws ConfigError when segments < 1 or customers < segments.
SyntheticDataset generate_synthetic(const SynthConfig& config);

std::string serialize_labels(const Dataset& dataset, const std::vector<int>& labels);

}  // namespace custseg
