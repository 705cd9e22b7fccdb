#pragma once

#include "vecq/lambda_template.hpp"
#include "vecq/quantizer.hpp"
#include "vecq/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace vecq {

// Row-major rows x cols block of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

enum class Activation { ReLU, Tanh };

// Bitwidths for weights and activations; nullopt keeps full precision.
struct QuantSetting {
    std::optional<int> weight_bits;
    std::optional<int> activation_bits;

    std::string label() const;
};

inline constexpr double kDefaultEmaMomentum = 0.9;

struct LayerState {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    WeightVector w_full;  // shadow full-precision weights, outputs x inputs
    QuantResult w_quant;  // refreshed from w_full on every training forward
    std::vector<double> bias;
    double act_sigma_ema = 0.0;
    double ema_momentum = kDefaultEmaMomentum;
    bool ema_initialized = false;
};

class Mlp {
public:
    // widths = {inputs, hidden..., outputs}. He/Xavier-style uniform init.
    Mlp(std::vector<std::size_t> widths, Activation hidden, QuantSetting setting,
        std::uint64_t seed, double ema_momentum = kDefaultEmaMomentum,
        const LambdaTemplate& lambdas = LambdaTemplate::reference());

    std::vector<LayerState>& layers() noexcept { return layers_; }
    const std::vector<LayerState>& layers() const noexcept { return layers_; }
    const QuantSetting& setting() const noexcept { return setting_; }
    Activation activation() const noexcept { return activation_; }
    const LambdaTemplate& lambdas() const noexcept { return lambdas_; }
    std::size_t parameter_count() const;

    // Weights used in the forward pass: w_quant.reconstructed when weight
    // quantization is on, otherwise w_full.
    std::span<const double> effective_weights(std::size_t layer) const;

    void refresh_quantized();
    // Bumped on every weight update; caches from older versions are stale.
    std::uint64_t version() const noexcept { return version_; }
    void mark_updated() noexcept;

private:
    std::vector<LayerState> layers_;
    Activation activation_;
    QuantSetting setting_;
    LambdaTemplate lambdas_;
    std::uint64_t version_ = 0;
    bool quant_stale_ = true;

    friend struct MlpAccess;
};

enum class Mode { Train, Inference };

struct ForwardCache {
    std::uint64_t version = 0;
    std::vector<Matrix> layer_inputs;    // input seen by each layer
    std::vector<Matrix> pre_activations; // z(l)
};

struct ForwardOutput {
    Matrix logits;
    ForwardCache cache;
};

ForwardOutput forward(Mlp& net, const Matrix& batch, Mode mode = Mode::Inference);

struct LayerGradients {
    WeightVector weights;
    std::vector<double> bias;
};

// Backprop through the effective (quantized) weights. The weight quantizer
// is the identity for gradient purposes.
std::vector<LayerGradients> compute_gradients(const Mlp& net, const ForwardCache& cache,
                                              const Matrix& grad_logits);
void apply_gradients(Mlp& net, const std::vector<LayerGradients>& grads, double lr);
void backward_and_update(Mlp& net, const ForwardCache& cache, const Matrix& grad_logits,
                         double lr);

struct LossOutput {
    double loss = 0.0;  // mean softmax cross-entropy
    Matrix grad_logits;
    std::size_t correct = 0;
};

LossOutput softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

// sigma_ema <- m * sigma_ema + (1 - m) * sigma_batch
double update_ema(double sigma_ema, double sigma_batch, double momentum);

// alpha * steer(a, template[k] * sigma, k) with alpha from drive.
WeightVector quantize_activation(std::span<const double> a, int bits, double sigma,
                                 const LambdaTemplate& lambdas = LambdaTemplate::reference());

struct Dataset;

struct TrainConfig {
    std::string dataset = "moons";
    std::string mnist_images;
    std::string mnist_labels;
    std::string mnist_test_images;
    std::string mnist_test_labels;
    std::size_t train_size = 1000;
    std::size_t test_size = 500;
    double noise = 0.2;
    std::vector<std::size_t> hidden = {32, 32};
    Activation activation = Activation::ReLU;
    int epochs = 200;
    std::size_t batch_size = 32;
    double learning_rate = 0.1;
    double lr_decay = 1.0;  // multiplied into the rate after each epoch
    std::uint64_t seed = 1;
    double ema_momentum = kDefaultEmaMomentum;
    std::vector<QuantSetting> settings = {QuantSetting{}};

    void validate() const;
};

TrainConfig train_config_from_json(const std::string& text);

struct EpochMetrics {
    int epoch = 0;
    std::string split;
    double accuracy = 0.0;
    double loss = 0.0;
};

struct SettingReport {
    QuantSetting setting;
    std::vector<EpochMetrics> epochs;
    double final_train_accuracy = 0.0;
    double final_test_accuracy = 0.0;
};

struct TrainReport {
    std::vector<SettingReport> settings;
};

double evaluate(Mlp& net, const Dataset& data, double* mean_loss = nullptr);

TrainReport train_demo(const TrainConfig& config);

// One JSON object per line: {"accuracy","epoch","loss","setting","split"}.
void write_metrics_jsonl(std::ostream& out, const TrainReport& report);

}  // namespace vecq
