#include "custseg/ingest.hpp"

#include "custseg/csv.hpp"
#include "custseg/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_map>

namespace custseg {

namespace {

TxType parse_type(std::string_view token, std::size_t row) {
    if (token == "Credit") return TxType::Credit;
    if (token == "Debit") return TxType::Debit;
    throw ValueError(row, "unknown transaction Type '" + std::string(token) + "'");
}

std::string_view type_token(TxType t) { return t == TxType::Credit ? "Credit" : "Debit"; }

std::string make_id(char prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%08zu", prefix, n);
    return buf;
}

struct City {
    double latitude;
    double longitude;
};

constexpr std::array<City, 8> kCities{{
    {35.08449, -106.65114},  // Albuquerque
    {40.71427, -74.00597},   // New York
    {39.76838, -86.15804},   // Indianapolis
    {47.60621, -122.33207},  // Seattle
    {25.77427, -80.19366},   // Miami
    {41.85003, -87.65005},   // Chicago
    {39.73915, -104.98470},  // Denver
    {29.76328, -95.36327},   // Houston
}};

constexpr std::int64_t kEpoch = 1356998400;  // 2013-01-01T00:00:00Z
constexpr std::int64_t kDay = 86400;

}  // namespace

std::vector<std::string> Dataset::customer_ids() const {
    std::vector<std::string> ids;
    ids.reserve(customers.size());
    for (const auto& c : customers) ids.push_back(c.customer_id);
    return ids;
}

std::vector<TransactionRecord> parse_transactions(std::string_view text) {
    const csv::Table table = csv::parse(text);
    const std::size_t c_id = table.column("Trans_ID");
    const std::size_t c_acct = table.column("Account_ID");
    const std::size_t c_type = table.column("Type");
    const std::size_t c_amount = table.column("Amount");
    const std::size_t c_balance = table.column("Balance");
    const std::size_t c_ts = table.column("Timestamp");

    std::vector<TransactionRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        TransactionRecord rec;
        rec.trans_id = row[c_id];
        rec.account_id = row[c_acct];
        rec.type = parse_type(row[c_type], r);
        rec.amount = csv::parse_double(row[c_amount], r, "Amount");
        rec.balance = csv::parse_double(row[c_balance], r, "Balance");
        rec.timestamp = csv::parse_int(row[c_ts], r, "Timestamp");
        if (rec.amount < 0.0) throw ValueError(r, "Amount must be non-negative");
        if (rec.timestamp < 0) throw ValueError(r, "Timestamp must be non-negative");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CustomerProfile> parse_customers(std::string_view text) {
    const csv::Table table = csv::parse(text);
    const std::size_t c_id = table.column("Customer_ID");
    const std::size_t c_acct = table.column("Account_ID");
    const std::size_t c_gender = table.column("Gender");
    const std::size_t c_age = table.column("Age");
    const std::size_t c_lat = table.column("Latitude");
    const std::size_t c_lon = table.column("Longitude");

    std::vector<CustomerProfile> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        CustomerProfile p;
        p.customer_id = row[c_id];
        p.account_id = row[c_acct];
        p.gender = csv::parse_double(row[c_gender], r, "Gender");
        const long long age = csv::parse_int(row[c_age], r, "Age");
        p.latitude = csv::parse_double(row[c_lat], r, "Latitude");
        p.longitude = csv::parse_double(row[c_lon], r, "Longitude");
        if (p.gender != 0.0 && p.gender != 1.0) throw ValueError(r, "Gender must be 0 or 1");
        if (age < 1 || age > 130) throw ValueError(r, "Age out of range [1, 130]");
        if (p.latitude < -90.0 || p.latitude > 90.0) throw ValueError(r, "Latitude out of range [-90, 90]");
        if (p.longitude < -180.0 || p.longitude > 180.0) {
            throw ValueError(r, "Longitude out of range [-180, 180]");
        }
        p.age = static_cast<int>(age);
        out.push_back(std::move(p));
    }
    return out;
}

std::string serialize_transactions(const std::vector<TransactionRecord>& records) {
    std::string out = "Trans_ID,Account_ID,Type,Amount,Balance,Timestamp\n";
    for (const auto& r : records) {
        out += csv::join({r.trans_id, r.account_id, std::string(type_token(r.type)), csv::format(r.amount),
                          csv::format(r.balance), std::to_string(r.timestamp)});
        out.push_back('\n');
    }
    return out;
}

std::string serialize_customers(const std::vector<CustomerProfile>& customers) {
    std::string out = "Customer_ID,Account_ID,Gender,Age,Latitude,Longitude\n";
    for (const auto& c : customers) {
        out += csv::join({c.customer_id, c.account_id, csv::format_fixed(c.gender, 1), std::to_string(c.age),
                          csv::format(c.latitude), csv::format(c.longitude)});
        out.push_back('\n');
    }
    return out;
}

std::string serialize_labels(const Dataset& dataset, const std::vector<int>& labels) {
    std::string out = "customer_id,segment\n";
    for (std::size_t i = 0; i < dataset.customers.size() && i < labels.size(); ++i) {
        out += csv::join({dataset.customers[i].customer_id, std::to_string(labels[i])});
        out.push_back('\n');
    }
    return out;
}

Dataset build_dataset(const std::vector<TransactionRecord>& transactions,
                      const std::vector<CustomerProfile>& customers) {
    std::unordered_map<std::string, std::size_t> by_account;
    for (std::size_t i = 0; i < customers.size(); ++i) {
        if (!by_account.emplace(customers[i].account_id, i).second) {
            throw InputError("account " + customers[i].account_id + " belongs to more than one customer");
        }
    }

    std::vector<std::vector<TransactionRecord>> grouped(customers.size());
    std::vector<std::string> orphans;
    for (const auto& tx : transactions) {
        const auto it = by_account.find(tx.account_id);
        if (it == by_account.end()) {
            if (std::find(orphans.begin(), orphans.end(), tx.account_id) == orphans.end()) {
                orphans.push_back(tx.account_id);
            }
            continue;
        }
        grouped[it->second].push_back(tx);
    }
    if (!orphans.empty()) {
        std::string msg = "orphan transactions for unknown accounts:";
        for (const auto& id : orphans) msg += " " + id;
        throw InputError(msg);
    }

    Dataset ds;
    for (std::size_t i = 0; i < customers.size(); ++i) {
        auto& recs = grouped[i];
        if (recs.empty()) {
            ++ds.dropped_customers;
            continue;
        }
        std::stable_sort(recs.begin(), recs.end(),
                         [](const TransactionRecord& a, const TransactionRecord& b) { return a.timestamp < b.timestamp; });
        ds.max_len = std::max(ds.max_len, recs.size());
        ds.customers.push_back(customers[i]);
        ds.sequences.push_back(CustomerSequence{customers[i].customer_id, std::move(recs)});
    }
    return ds;
}

std::vector<TransactionRecord> flatten_transactions(const Dataset& dataset) {
    std::vector<TransactionRecord> out;
    for (const auto& seq : dataset.sequences) out.insert(out.end(), seq.records.begin(), seq.records.end());
    return out;
}

std::vector<SegmentRegime> default_regimes(std::size_t segments) {
    std::vector<SegmentRegime> regimes;
    regimes.reserve(segments);
    // Profiles cycle with period 3; amounts scale up each full cycle.
    constexpr std::array<std::size_t, 3> kMinTx{20, 50, 20};
    constexpr std::array<std::size_t, 3> kMaxTx{26, 60, 26};
    constexpr std::array<double, 3> kAmount{200.0, 1100.0, 2600.0};
    constexpr std::array<double, 3> kInterval{5.0, 20.0, 10.0};
    constexpr std::array<double, 3> kAge{28.0, 62.0, 45.0};
    for (std::size_t g = 0; g < segments; ++g) {
        SegmentRegime r;
        r.name = segments == 1 ? "all" : (g == 0 ? "low-spender" : (g + 1 == segments ? "high-spender" : "segment-" + std::to_string(g)));
        r.mean_amount = kAmount[g % 3] * static_cast<double>(1 + g / 3);
        r.amount_spread = 0.25;
        r.min_transactions = kMinTx[g % 3];
        r.max_transactions = kMaxTx[g % 3];
        r.mean_interval_days = kInterval[g % 3];
        r.credit_probability = 0.5;
        r.mean_age = kAge[g % 3];
        r.home_city = g % kCities.size();
        regimes.push_back(std::move(r));
    }
    return regimes;
}

SyntheticDataset generate_synthetic(const SynthConfig& config) {
    if (config.segments < 1) throw ConfigError("synthetic: segment count must be >= 1");
    if (config.customers < config.segments) throw ConfigError("synthetic: customers must be >= segments");
    std::vector<SegmentRegime> regimes = config.regimes.empty() ? default_regimes(config.segments) : config.regimes;
    if (regimes.size() != config.segments) {
        throw ConfigError("synthetic: expected " + std::to_string(config.segments) + " regimes, got " +
                          std::to_string(regimes.size()));
    }
    for (const auto& r : regimes) {
        if (r.min_transactions < 1 || r.max_transactions < r.min_transactions || r.mean_amount <= 0.0 ||
            r.mean_interval_days <= 0.0 || r.amount_spread < 0.0 || r.credit_probability < 0.0 ||
            r.credit_probability > 1.0 || r.home_city >= kCities.size()) {
            throw ConfigError("synthetic: invalid regime '" + r.name + "'");
        }
    }

    std::mt19937_64 rng(config.seed);
    SyntheticDataset out;

    std::vector<int> labels(config.customers);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % config.segments);
    std::shuffle(labels.begin(), labels.end(), rng);

    std::vector<CustomerProfile> customers;
    std::vector<TransactionRecord> transactions;
    std::size_t next_tx = 1;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> start_day(0, 29);

    for (std::size_t i = 0; i < config.customers; ++i) {
        const SegmentRegime& reg = regimes[static_cast<std::size_t>(labels[i])];

        CustomerProfile p;
        p.customer_id = make_id('C', i + 1);
        p.account_id = make_id('A', i + 1);
        p.gender = unit(rng) < 0.5 ? 0.0 : 1.0;
        std::normal_distribution<double> age_dist(reg.mean_age, 4.0);
        p.age = static_cast<int>(std::clamp(std::lround(age_dist(rng)), 18L, 95L));
        const std::size_t city = unit(rng) < 0.85 ? reg.home_city
                                                  : static_cast<std::size_t>(unit(rng) * kCities.size()) % kCities.size();
        p.latitude = std::round((kCities[city].latitude + (unit(rng) - 0.5) * 0.1) * 1e5) / 1e5;
        p.longitude = std::round((kCities[city].longitude + (unit(rng) - 0.5) * 0.1) * 1e5) / 1e5;
        customers.push_back(p);

        std::uniform_int_distribution<std::size_t> count_dist(reg.min_transactions, reg.max_transactions);
        const std::size_t count = count_dist(rng);
        const double log_mu = std::log(reg.mean_amount) - 0.5 * reg.amount_spread * reg.amount_spread;
        std::lognormal_distribution<double> amount_dist(log_mu, reg.amount_spread);
        std::exponential_distribution<double> gap_dist(1.0 / reg.mean_interval_days);

        std::int64_t ts = kEpoch + start_day(rng) * kDay;
        double balance = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            if (k > 0) ts += std::max<std::int64_t>(1, std::llround(gap_dist(rng))) * kDay;
            TransactionRecord tx;
            tx.trans_id = make_id('T', next_tx++);
            tx.account_id = p.account_id;
            tx.amount = std::max(1.0, std::round(amount_dist(rng) * 100.0) / 100.0);
            const bool credit = k == 0 || unit(rng) < reg.credit_probability || tx.amount > balance;
            tx.type = credit ? TxType::Credit : TxType::Debit;
            balance = credit ? balance + tx.amount : balance - tx.amount;
            tx.balance = balance;
            tx.timestamp = ts;
            transactions.push_back(std::move(tx));
        }
    }

    // Bank-ledger order: chronological across all accounts.
    std::stable_sort(transactions.begin(), transactions.end(),
                     [](const TransactionRecord& a, const TransactionRecord& b) { return a.timestamp < b.timestamp; });

    out.dataset = build_dataset(transactions, customers);
    out.labels = std::move(labels);
    out.transactions = std::move(transactions);
    return out;
}

}  // namespace custseg
