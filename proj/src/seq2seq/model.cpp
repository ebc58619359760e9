#include "custseg/seq2seq.hpp"

#include "custseg/csv.hpp"
#include "custseg/error.hpp"
#include "custseg/json_io.hpp"
#include "custseg/kernels.hpp"
#include "lstm_internal.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace custseg {

using json = nlohmann::json;

void validate(const ModelConfig& c) {
    if (c.encoder_layers.empty() || c.decoder_layers.empty()) throw ConfigError("model: need at least one encoder and one decoder layer");
    for (auto w : c.encoder_layers) {
        if (w == 0) throw ConfigError("model: encoder layer width must be positive");
    }
    for (auto w : c.decoder_layers) {
        if (w == 0) throw ConfigError("model: decoder layer width must be positive");
    }
    if (c.latent_dim < 1) throw ConfigError("model: latent_dim must be >= 1");
    if (c.combine_dim < 1) throw ConfigError("model: combine_dim must be >= 1");
    if (c.attention && c.encoder_layers.back() != c.decoder_layers.back()) {
        throw ConfigError("model: attention needs equal encoder and decoder top widths");
    }
}

void validate(const TrainConfig& c, std::size_t max_len) {
    validate(c.model);
    if (c.model.latent_dim >= max_len) {
        throw ConfigError("latent_dim " + std::to_string(c.model.latent_dim) +
                          " must be smaller than the longest sequence (" + std::to_string(max_len) + ")");
    }
    if (!(c.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (c.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    const double fractions[] = {c.train_fraction, c.test_fraction, c.validation_fraction};
    for (double f : fractions) {
        if (f < 0.0 || f > 1.0) throw ConfigError("train: split fractions must lie in [0, 1]");
    }
    if (std::fabs(c.train_fraction + c.test_fraction + c.validation_fraction - 1.0) > 1e-9) {
        throw ConfigError("train: split fractions must sum to 1");
    }
    if (c.train_fraction <= 0.0) throw ConfigError("train: train_fraction must be positive");
    if (c.clip_norm < 0.0) throw ConfigError("train: clip_norm must be >= 0");
}

// ---------------------------------------------------------------------------

std::size_t ParamLayout::add(std::string name, std::size_t rows, std::size_t cols) {
    slots_.push_back(TensorSlot{std::move(name), total_, rows, cols});
    total_ += rows * cols;
    return slots_.size() - 1;
}

ParamLayout::ParamLayout(const ModelConfig& c) {
    std::size_t input = kFeatureCount;
    for (std::size_t k = 0; k < c.encoder_layers.size(); ++k) {
        const std::size_t H = c.encoder_layers[k];
        const std::string p = "encoder." + std::to_string(k) + ".";
        Lstm l{add(p + "W", 4 * H, input), add(p + "U", 4 * H, H), add(p + "b", 4 * H, 1), input, H};
        encoder.push_back(l);
        input = H;
    }
    const std::size_t enc_top = c.encoder_layers.back();
    latent = Dense{add("latent.W", c.latent_dim, enc_top), add("latent.b", c.latent_dim, 1), enc_top, c.latent_dim};
    for (std::size_t k = 0; k < c.decoder_layers.size(); ++k) {
        const std::size_t H = c.decoder_layers[k];
        const std::string p = "bridge." + std::to_string(k) + ".";
        bridge.push_back(Dense{add(p + "W", H, c.latent_dim), add(p + "b", H, 1), c.latent_dim, H});
    }
    input = kFeatureCount;
    for (std::size_t k = 0; k < c.decoder_layers.size(); ++k) {
        const std::size_t H = c.decoder_layers[k];
        const std::string p = "decoder." + std::to_string(k) + ".";
        Lstm l{add(p + "W", 4 * H, input), add(p + "U", 4 * H, H), add(p + "b", 4 * H, 1), input, H};
        decoder.push_back(l);
        input = H;
    }
    const std::size_t combine_in = c.decoder_layers.back() + (c.attention ? enc_top : 0);
    combine = Dense{add("combine.W", c.combine_dim, combine_in), add("combine.b", c.combine_dim, 1), combine_in,
                    c.combine_dim};
    output = Dense{add("output.W", kFeatureCount, c.combine_dim), add("output.b", kFeatureCount, 1), c.combine_dim,
                   kFeatureCount};
}

Seq2SeqModel::Seq2SeqModel(ModelConfig config)
    : config_((validate(config), std::move(config))), layout_(config_), params_(layout_.total(), 0.0) {}

Seq2SeqModel Seq2SeqModel::initialize(const ModelConfig& config, std::uint64_t seed) {
    Seq2SeqModel model(config);
    std::mt19937_64 rng(seed);
    const auto& L = model.layout_;
    auto fill = [&](std::size_t slot, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : model.tensor(slot)) v = dist(rng);
    };
    auto fill_lstm = [&](const ParamLayout::Lstm& l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.hidden));
        fill(l.W, bound);
        fill(l.U, bound);
        fill(l.b, bound);
    };
    auto fill_dense = [&](const ParamLayout::Dense& d) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d.input));
        fill(d.W, bound);
        fill(d.b, bound);
    };
    for (const auto& l : L.encoder) fill_lstm(l);
    fill_dense(L.latent);
    for (const auto& d : L.bridge) fill_dense(d);
    for (const auto& l : L.decoder) fill_lstm(l);
    fill_dense(L.combine);
    fill_dense(L.output);
    return model;
}

std::span<double> Seq2SeqModel::tensor(std::size_t slot) {
    const auto& s = layout_.slots().at(slot);
    return std::span<double>(params_).subspan(s.offset, s.size());
}

std::span<const double> Seq2SeqModel::tensor(std::size_t slot) const {
    const auto& s = layout_.slots().at(slot);
    return std::span<const double>(params_).subspan(s.offset, s.size());
}

// ---------------------------------------------------------------------------

LstmState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmCellParams& params) {
    const std::size_t H = params.hidden();
    if (params.W.rows() != 4 * H || params.U.rows() != 4 * H || params.b.size() != 4 * H ||
        params.W.cols() != x.size() || h_prev.size() != H || c_prev.size() != H) {
        throw InputError("lstm_cell_forward: inconsistent shapes");
    }
    const detail::LstmView v{params.W.data().data(), params.U.data().data(), params.b.data(), x.size(), H};
    std::vector<double> gates(4 * H);
    LstmState out{std::vector<double>(H), std::vector<double>(H)};
    detail::lstm_step(v, x.data(), h_prev.data(), c_prev.data(), gates.data(), out.c.data(), out.h.data());
    for (std::size_t j = 0; j < H; ++j) {
        if (!std::isfinite(out.h[j]) || !std::isfinite(out.c[j])) throw NumericError("lstm_cell_forward: non-finite state");
    }
    return out;
}

EncoderOutput encode(std::span<const double> rows, std::size_t length, const Seq2SeqModel& model) {
    if (length == 0) throw InputError("encode: sequence length must be >= 1");
    if (rows.size() < length * kFeatureCount) throw InputError("encode: fewer rows than length");
    const auto& L = model.layout();
    Matrix inputs(length, kFeatureCount);
    std::copy(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(length * kFeatureCount), inputs.data().begin());

    detail::LstmTrace trace;
    for (const auto& layer : L.encoder) {
        detail::lstm_forward(detail::view(model.params(), L, layer), inputs, {}, trace);
        Matrix next(length, layer.hidden);
        for (std::size_t t = 0; t < length; ++t) {
            std::copy(trace.h.row(t + 1).begin(), trace.h.row(t + 1).end(), next.row(t).begin());
        }
        inputs = std::move(next);
    }
    EncoderOutput out;
    out.hidden_states = std::move(inputs);
    out.latent.resize(L.latent.output);
    detail::dense_forward(detail::view(model.params(), L, L.latent), out.hidden_states.row(length - 1).data(),
                          out.latent.data());
    for (double& z : out.latent) {
        z = detail::sigmoid(z);
        if (!std::isfinite(z)) throw NumericError("encode: non-finite latent");
    }
    return out;
}

DecoderState initial_decoder_state(std::span<const double> latent, const Seq2SeqModel& model) {
    const auto& L = model.layout();
    if (latent.size() != L.latent.output) throw InputError("initial_decoder_state: latent width mismatch");
    DecoderState state;
    for (std::size_t k = 0; k < L.decoder.size(); ++k) {
        std::vector<double> h(L.decoder[k].hidden);
        detail::dense_forward(detail::view(model.params(), L, L.bridge[k]), latent.data(), h.data());
        for (double& v : h) v = std::max(0.0, v);
        state.h.push_back(std::move(h));
        state.c.emplace_back(L.decoder[k].hidden, 0.0);
    }
    return state;
}

DecodeStep decode_step(std::span<const double> y_prev, DecoderState& state, const Matrix& encoder_hidden,
                       const Seq2SeqModel& model) {
    const auto& L = model.layout();
    const auto& cfg = model.config();
    if (y_prev.size() != kFeatureCount) throw InputError("decode_step: y_prev must have 4 entries");
    if (state.h.size() != L.decoder.size()) throw InputError("decode_step: state depth mismatch");

    DecodeStep out;
    const std::size_t enc_width = cfg.encoder_layers.back();
    std::vector<double> context(cfg.attention ? enc_width : 0, 0.0);
    if (cfg.attention) {
        if (encoder_hidden.rows() == 0 || encoder_hidden.cols() != enc_width) {
            throw InputError("decode_step: attention needs encoder hidden states");
        }
        const auto& q = state.h.back();
        out.attention.resize(encoder_hidden.rows());
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < encoder_hidden.rows(); ++i) {
            out.attention[i] = kernels::dot(q, encoder_hidden.row(i));
            peak = std::max(peak, out.attention[i]);
        }
        double total = 0.0;
        for (double& a : out.attention) {
            a = std::exp(a - peak);
            total += a;
        }
        for (double& a : out.attention) a /= total;
        for (std::size_t i = 0; i < encoder_hidden.rows(); ++i) kernels::axpy(out.attention[i], encoder_hidden.row(i), context);
    }

    std::vector<double> input(y_prev.begin(), y_prev.end());
    for (std::size_t k = 0; k < L.decoder.size(); ++k) {
        const std::size_t H = L.decoder[k].hidden;
        std::vector<double> gates(4 * H), c(H), h(H);
        detail::lstm_step(detail::view(model.params(), L, L.decoder[k]), input.data(), state.h[k].data(),
                          state.c[k].data(), gates.data(), c.data(), h.data());
        state.h[k] = h;
        state.c[k] = std::move(c);
        input = std::move(h);
    }

    std::vector<double> joined = input;
    joined.insert(joined.end(), context.begin(), context.end());
    std::vector<double> hidden(L.combine.output);
    detail::dense_forward(detail::view(model.params(), L, L.combine), joined.data(), hidden.data());
    for (double& v : hidden) v = std::max(0.0, v);
    out.y_hat.resize(kFeatureCount);
    detail::dense_forward(detail::view(model.params(), L, L.output), hidden.data(), out.y_hat.data());
    for (double v : out.y_hat) {
        if (!std::isfinite(v)) throw NumericError("decode_step: non-finite output");
    }
    return out;
}

// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const Seq2SeqModel& model, const TrainConfig& config) {
    json doc;
    doc["format"] = "custseg-seq2seq";
    doc["version"] = 1;
    doc["seed"] = config.seed;
    doc["config"] = to_json(config);
    json tensors = json::array();
    for (std::size_t s = 0; s < model.layout().slots().size(); ++s) {
        const auto& slot = model.layout().slots()[s];
        const auto values = model.tensor(s);
        tensors.push_back({{"name", slot.name},
                           {"rows", slot.rows},
                           {"cols", slot.cols},
                           {"values", std::vector<double>(values.begin(), values.end())}});
    }
    doc["tensors"] = std::move(tensors);
    csv::write_file(path, doc.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(csv::read_file(path));
    } catch (const json::exception& e) {
        throw InputError("checkpoint " + path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "custseg-seq2seq" || doc.value("version", 0) != 1) {
        throw InputError("checkpoint " + path.string() + ": unsupported format or version");
    }
    TrainConfig config = train_config_from_json(doc.at("config"));
    Seq2SeqModel model(config.model);
    const auto& tensors = doc.at("tensors");
    const auto& slots = model.layout().slots();
    if (tensors.size() != slots.size()) throw InputError("checkpoint: tensor count does not match the config");
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& t = tensors[s];
        if (t.at("name").get<std::string>() != slots[s].name || t.at("rows").get<std::size_t>() != slots[s].rows ||
            t.at("cols").get<std::size_t>() != slots[s].cols) {
            throw InputError("checkpoint: tensor " + std::to_string(s) + " does not match " + slots[s].name);
        }
        const auto values = t.at("values").get<std::vector<double>>();
        if (values.size() != slots[s].size()) throw InputError("checkpoint: wrong value count for " + slots[s].name);
        std::copy(values.begin(), values.end(), model.tensor(s).begin());
    }
    return Checkpoint{std::move(model), std::move(config)};
}

std::string losses_to_csv(const std::vector<LossRecord>& losses) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (const auto& r : losses) {
        out += std::to_string(r.epoch) + "," + csv::format(r.train_loss) + "," +
               (r.validation_loss ? csv::format(*r.validation_loss) : std::string()) + "\n";
    }
    return out;
}

}  // namespace custseg
