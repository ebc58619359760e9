#pragma once

// Shared seeded fixtures for unit and acceptance tests.

#include "custseg/ingest.hpp"
#include "custseg/preprocess.hpp"
#include "custseg/seq2seq.hpp"

#include <filesystem>
#include <random>

namespace fixture {

inline constexpr std::uint64_t kShippedSeed = 7;

/// First three transactions of five synthetic customers, z-scored.
inline custseg::PaddedSequenceBatch copy_task_batch() {
    custseg::SynthConfig config;
    config.customers = 5;
    config.segments = 3;
    config.seed = kShippedSeed;
    custseg::Dataset d = custseg::generate_synthetic(config).dataset;
    for (auto& s : d.sequences) s.records.resize(3);
    d.max_len = 3;
    const auto raw = custseg::make_padded(d);
    return custseg::apply_zscore(raw, custseg::fit_zscore(raw));
}

inline custseg::TrainConfig copy_task_config() {
    custseg::TrainConfig c;
    c.model.encoder_layers = {32};
    c.model.decoder_layers = {32};
    c.model.latent_dim = 2;
    c.model.combine_dim = 32;
    c.learning_rate = 0.2;
    c.clip_norm = 1.0;
    c.batch_size = 1;
    c.epochs = 200;
    c.train_fraction = 1.0;
    c.test_fraction = 0.0;
    c.validation_fraction = 0.0;
    c.seed = kShippedSeed;
    return c;
}

/// Two customers (3 and 2 steps) of seeded normal rows.
inline custseg::PaddedSequenceBatch gradient_batch() {
    custseg::PaddedSequenceBatch b(std::vector<std::size_t>{3, 2}, 3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t t = 0; t < b.length(n); ++t) {
            for (auto& v : b.row(n, t)) v = normal(rng);
        }
    }
    return b;
}

inline custseg::ModelConfig gradient_model() {
    custseg::ModelConfig m;
    m.encoder_layers = {5, 4};
    m.decoder_layers = {3, 4};
    m.latent_dim = 2;
    m.combine_dim = 5;
    return m;
}

inline std::filesystem::path source_dir() { return CUSTSEG_SOURCE_DIR; }

}  // namespace fixture
