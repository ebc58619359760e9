#pragma once

// LSTM encoder-decoder with dot-product attention, trained by teacher forcing
// on z-scored transaction sequences. The encoder's sigmoid latent projection
// is the per-customer feature vector.
//
// Network, per customer with L real rows x_0..x_{L-1}:
//   encoder   stacked LSTM over x_0..x_{L-1} (padding never enters)
//   latent    z = sigmoid(W_z h_top[L-1] + b_z)
//   bridge    decoder layer k starts at h = relu(W_k z + b_k), c = 0
//   decoder   stacked LSTM over [SOS, x_0 .. x_{L-1}]
//   attention scores q . e_i with q the previous decoder top hidden state and
//             e_i the encoder top hidden states; softmax; context = sum a_i e_i
//   output    y = W_o relu(W_c [h_t; context] + b_c) + b_o
// Loss: squared error over the L real targets and the EOS row, averaged over
// those elements.

#include "custseg/features.hpp"
#include "custseg/matrix.hpp"
#include "custseg/preprocess.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace custseg {

struct ModelConfig {
    std::vector<std::size_t> encoder_layers{16, 16};
    std::vector<std::size_t> decoder_layers{16, 16};
    std::size_t latent_dim = 8;
    std::size_t combine_dim = 16;
    bool attention = true;

    bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
    ModelConfig model;
    double learning_rate = 0.05;
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    std::uint64_t seed = 7;
    double train_fraction = 0.70;
    double test_fraction = 0.20;
    double validation_fraction = 0.10;
    double clip_norm = 5.0;  // global gradient-norm clip per update; 0 disables

    bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError on inconsistent shapes, fractions that do not sum to 1,
/// or latent_dim >= max_len.
void validate(const TrainConfig& config, std::size_t max_len);
void validate(const ModelConfig& config);

// ---------------------------------------------------------------------------
// Parameters

struct TensorSlot {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const noexcept { return rows * cols; }
};

/// Flat parameter layout. Slot order (also the checkpoint order):
///   encoder.{k}.{W,U,b}, latent.{W,b}, bridge.{k}.{W,b},
///   decoder.{k}.{W,U,b}, combine.{W,b}, output.{W,b}
/// LSTM gate blocks are stacked as input, forget, cell-candidate, output.
class ParamLayout {
public:
    struct Lstm {
        std::size_t W, U, b;  // slot indices
        std::size_t input, hidden;
    };
    struct Dense {
        std::size_t W, b;
        std::size_t input, output;
    };

    explicit ParamLayout(const ModelConfig& config);

    const std::vector<TensorSlot>& slots() const noexcept { return slots_; }
    std::size_t total() const noexcept { return total_; }

    std::vector<Lstm> encoder;
    Dense latent{};
    std::vector<Dense> bridge;
    std::vector<Lstm> decoder;
    Dense combine{};
    Dense output{};

private:
    std::size_t add(std::string name, std::size_t rows, std::size_t cols);

    std::vector<TensorSlot> slots_;
    std::size_t total_ = 0;
};

class Seq2SeqModel {
public:
    /// All-zero parameters.
    explicit Seq2SeqModel(ModelConfig config);
    /// Uniform in [-k, k]: k = 1/sqrt(hidden) for LSTM tensors and
    /// 1/sqrt(fan_in) for dense tensors.
    static Seq2SeqModel initialize(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const noexcept { return config_; }
    const ParamLayout& layout() const noexcept { return layout_; }
    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::span<double> tensor(std::size_t slot);
    std::span<const double> tensor(std::size_t slot) const;

    bool operator==(const Seq2SeqModel& other) const { return config_ == other.config_ && params_ == other.params_; }

private:
    ModelConfig config_;
    ParamLayout layout_;
    std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Cell, encoder, decoder

/// Standalone LSTM cell parameters: W is 4H x input, U is 4H x H, b is 4H.
struct LstmCellParams {
    Matrix W;
    Matrix U;
    std::vector<double> b;
    std::size_t hidden() const noexcept { return U.cols(); }
};

struct LstmState {
    std::vector<double> h;
    std::vector<double> c;
};

/// i = sigma(.), f = sigma(.), g = tanh(.), o = sigma(.);
/// c = f*c_prev + i*g; h = o*tanh(c). Throws NumericError on non-finite output.
LstmState lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                            std::span<const double> c_prev, const LstmCellParams& params);

struct EncoderOutput {
    Matrix hidden_states;       // length x H_top
    std::vector<double> latent; // latent_dim, each in (0, 1)
};

/// `rows` holds `length` rows of width 4. Throws InputError when length is 0.
EncoderOutput encode(std::span<const double> rows, std::size_t length, const Seq2SeqModel& model);

struct DecoderState {
    std::vector<std::vector<double>> h;  // per decoder layer
    std::vector<std::vector<double>> c;
};

/// Decoder state produced by the bridge from a latent vector.
DecoderState initial_decoder_state(std::span<const double> latent, const Seq2SeqModel& model);

struct DecodeStep {
    std::vector<double> y_hat;       // 4 entries
    std::vector<double> attention;   // one weight per encoder state (empty when disabled)
};

/// One teacher-forced step: attention from the state's top hidden vector,
/// then the LSTM stack on y_prev, then the output head. Updates `state`.
DecodeStep decode_step(std::span<const double> y_prev, DecoderState& state, const Matrix& encoder_hidden,
                       const Seq2SeqModel& model);

// ---------------------------------------------------------------------------
// Loss and gradients

/// Hooks for mutation testing of the backward pass.
enum class GradientFault { None, ForgetGate };

struct LossTotals {
    double squared_error = 0.0;
    std::size_t elements = 0;
    double mean() const noexcept { return elements == 0 ? 0.0 : squared_error / static_cast<double>(elements); }
};

/// Teacher-forced loss of customers `indices` in a normalized batch.
LossTotals evaluate_loss(const Seq2SeqModel& model, const PaddedSequenceBatch& batch,
                         std::span<const std::size_t> indices);

/// Mean loss over `indices` and its gradient (same layout as the params).
double loss_and_gradient(const Seq2SeqModel& model, const PaddedSequenceBatch& batch,
                         std::span<const std::size_t> indices, std::span<double> gradient,
                         GradientFault fault = GradientFault::None);

struct TensorCheck {
    std::string name;
    double relative_error = 0.0;  // ||analytic - numeric|| / (||analytic|| + ||numeric||)
};

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::vector<TensorCheck> tensors;
};

/// Central differences with step `h` for every parameter. Intended for
/// batches of at most a few short sequences.
GradientCheckReport gradient_check(const Seq2SeqModel& model, const PaddedSequenceBatch& batch,
                                   GradientFault fault = GradientFault::None, double h = 1e-5);

// ---------------------------------------------------------------------------
// Training

struct LossRecord {
    std::size_t epoch = 0;  // 0 is the initialization
    double train_loss = 0.0;
    std::optional<double> validation_loss;
    double learning_rate = 0.0;

    bool operator==(const LossRecord&) const = default;
};

struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> validation;
};

/// Seeded shuffle, then train / test / validation by rounded fractions.
DataSplit split_customers(std::size_t customers, const TrainConfig& config);

struct TrainResult {
    Seq2SeqModel model;
    std::vector<LossRecord> losses;
    DataSplit split;
    std::optional<double> test_loss;
};

/// Minibatch gradient descent. After each epoch the training loss is
/// recomputed; if it rose, the epoch is rolled back and the learning rate
/// halved, so the recorded training curve never increases. A non-finite loss
/// aborts with NumericError naming the last good epoch.
TrainResult train(const PaddedSequenceBatch& batch, const TrainConfig& config);

/// One latent row per customer, in batch order.
FeatureMatrix extract_features(const PaddedSequenceBatch& batch, const Seq2SeqModel& model,
                               const std::vector<std::string>& customer_ids, unsigned threads = 0);

// ---------------------------------------------------------------------------
// Persistence

/// JSON checkpoint: format tag, version, config echo, seed, then every
/// tensor in layout order with name, shape and row-major values.
void save_checkpoint(const std::filesystem::path& path, const Seq2SeqModel& model, const TrainConfig& config);

struct Checkpoint {
    Seq2SeqModel model;
    TrainConfig config;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// epoch,train_loss,val_loss
std::string losses_to_csv(const std::vector<LossRecord>& losses);

}  // namespace custseg
