#include "custseg/json_io.hpp"

#include "custseg/error.hpp"

#include <algorithm>

namespace custseg {

using json = nlohmann::json;

void require_known_keys(const json& object, std::initializer_list<std::string_view> allowed, std::string_view context) {
    if (!object.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
    for (const auto& [key, _] : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
        }
    }
}

namespace {

template <class T>
void read(const json& object, const char* key, T& out, std::string_view context) {
    if (!object.contains(key)) return;
    try {
        out = object.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(context) + ": bad value for '" + key + "'");
    }
}

}  // namespace

json to_json(const ModelConfig& c) {
    return {{"encoder_layers", c.encoder_layers},
            {"decoder_layers", c.decoder_layers},
            {"latent_dim", c.latent_dim},
            {"combine_dim", c.combine_dim},
            {"attention", c.attention}};
}

json to_json(const TrainConfig& c) {
    return {{"model", to_json(c.model)},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"train_fraction", c.train_fraction},
            {"test_fraction", c.test_fraction},
            {"validation_fraction", c.validation_fraction},
            {"clip_norm", c.clip_norm}};
}

ModelConfig model_config_from_json(const json& o) {
    constexpr std::string_view ctx = "model";
    require_known_keys(o, {"encoder_layers", "decoder_layers", "latent_dim", "combine_dim", "attention"}, ctx);
    ModelConfig c;
    read(o, "encoder_layers", c.encoder_layers, ctx);
    read(o, "decoder_layers", c.decoder_layers, ctx);
    read(o, "latent_dim", c.latent_dim, ctx);
    read(o, "combine_dim", c.combine_dim, ctx);
    read(o, "attention", c.attention, ctx);
    return c;
}

TrainConfig train_config_from_json(const json& o) {
    constexpr std::string_view ctx = "train";
    require_known_keys(o,
                       {"model", "learning_rate", "epochs", "batch_size", "seed", "train_fraction", "test_fraction",
                        "validation_fraction", "clip_norm"},
                       ctx);
    TrainConfig c;
    if (o.contains("model")) c.model = model_config_from_json(o.at("model"));
    read(o, "learning_rate", c.learning_rate, ctx);
    read(o, "epochs", c.epochs, ctx);
    read(o, "batch_size", c.batch_size, ctx);
    read(o, "seed", c.seed, ctx);
    read(o, "train_fraction", c.train_fraction, ctx);
    read(o, "test_fraction", c.test_fraction, ctx);
    read(o, "validation_fraction", c.validation_fraction, ctx);
    read(o, "clip_norm", c.clip_norm, ctx);
    return c;
}

}  // namespace custseg
