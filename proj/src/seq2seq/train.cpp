#include "custseg/error.hpp"
#include "custseg/parallel.hpp"
#include "custseg/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace custseg {

DataSplit split_customers(std::size_t customers, const TrainConfig& config) {
    std::vector<std::size_t> order(customers);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto n = static_cast<double>(customers);
    const std::size_t n_train = std::min(customers, static_cast<std::size_t>(std::llround(n * config.train_fraction)));
    const std::size_t n_test =
        std::min(customers - n_train, static_cast<std::size_t>(std::llround(n * config.test_fraction)));

    DataSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), order.end());
    return split;
}

TrainResult train(const PaddedSequenceBatch& batch, const TrainConfig& config) {
    validate(config, batch.max_len());
    if (batch.customers() == 0) throw InputError("train: no customers");

    TrainResult result{Seq2SeqModel::initialize(config.model, config.seed), {}, split_customers(batch.customers(), config), {}};
    const auto& split = result.split;
    if (split.train.empty()) throw InputError("train: training split is empty");

    Seq2SeqModel& model = result.model;
    auto record = [&](std::size_t epoch, double loss, double lr) {
        LossRecord r{epoch, loss, std::nullopt, lr};
        if (!split.validation.empty()) r.validation_loss = evaluate_loss(model, batch, split.validation).mean();
        result.losses.push_back(r);
    };

    double lr = config.learning_rate;
    double loss = evaluate_loss(model, batch, split.train).mean();
    if (!std::isfinite(loss)) throw NumericError("train: non-finite loss at initialization");
    record(0, loss, lr);

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order = split.train;
    std::vector<double> grad(model.params().size());
    std::vector<double> snapshot(model.params().begin(), model.params().end());
    std::size_t last_good = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::copy(model.params().begin(), model.params().end(), snapshot.begin());
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> mb(order.data() + start, end - start);
            loss_and_gradient(model, batch, mb, grad);
            double step = lr;
            if (config.clip_norm > 0.0) {
                double norm2 = 0.0;
                for (double g : grad) norm2 += g * g;
                const double norm = std::sqrt(norm2);
                if (norm > config.clip_norm) step *= config.clip_norm / norm;
            }
            auto params = model.params();
            for (std::size_t p = 0; p < params.size(); ++p) params[p] -= step * grad[p];
        }

        const double next = evaluate_loss(model, batch, split.train).mean();
        if (!std::isfinite(next)) {
            throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch) + "; last good epoch " +
                               std::to_string(last_good));
        }
        if (next > loss) {
            std::copy(snapshot.begin(), snapshot.end(), model.params().begin());
            lr *= 0.5;
            record(epoch, loss, lr);
            continue;
        }
        loss = next;
        last_good = epoch;
        record(epoch, loss, lr);
    }

    if (!split.test.empty()) result.test_loss = evaluate_loss(model, batch, split.test).mean();
    return result;
}

FeatureMatrix extract_features(const PaddedSequenceBatch& batch, const Seq2SeqModel& model,
                               const std::vector<std::string>& customer_ids, unsigned threads) {
    if (customer_ids.size() != batch.customers()) throw InputError("extract_features: id count does not match batch");
    FeatureMatrix out;
    out.values = Matrix(batch.customers(), model.config().latent_dim);
    out.customer_ids = customer_ids;
    out.source = FeatureSource::Lstm;
    parallel_for(
        batch.customers(),
        [&](std::size_t n) {
            const auto enc = encode(batch.real_rows(n), batch.length(n), model);
            std::copy(enc.latent.begin(), enc.latent.end(), out.values.row(n).begin());
        },
        threads);
    return out;
}

}  // namespace custseg
