#include "vecq/train.hpp"

#include "vecq/datasets.hpp"
#include "vecq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <json.hpp>

namespace vecq {

std::string QuantSetting::label() const {
    auto part = [](const std::optional<int>& bits) {
        return bits ? std::to_string(*bits) : std::string("full");
    };
    return "W" + part(weight_bits) + "/A" + part(activation_bits);
}

Mlp::Mlp(std::vector<std::size_t> widths, Activation hidden, QuantSetting setting,
         std::uint64_t seed, double ema_momentum, const LambdaTemplate& lambdas)
    : activation_(hidden), setting_(setting), lambdas_(lambdas) {
    if (widths.size() < 2) fail(ErrorCode::InvalidArgument, "an MLP needs input and output widths");
    if (std::find(widths.begin(), widths.end(), 0u) != widths.end()) {
        fail(ErrorCode::InvalidArgument, "layer widths must be positive");
    }
    if (!(ema_momentum > 0.0 && ema_momentum < 1.0)) {
        fail(ErrorCode::InvalidArgument, "ema momentum must lie in (0, 1)");
    }
    if (setting_.weight_bits) check_bits(*setting_.weight_bits);
    if (setting_.activation_bits) check_bits(*setting_.activation_bits);

    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        LayerState layer;
        layer.inputs = widths[l];
        layer.outputs = widths[l + 1];
        layer.ema_momentum = ema_momentum;
        const double fan = hidden == Activation::ReLU
                               ? static_cast<double>(layer.inputs)
                               : 0.5 * static_cast<double>(layer.inputs + layer.outputs);
        const double bound = std::sqrt(6.0 / fan);
        std::uniform_real_distribution<double> init(-bound, bound);
        layer.w_full.resize(layer.inputs * layer.outputs);
        for (double& w : layer.w_full) w = init(rng);
        layer.bias.assign(layer.outputs, 0.0);
        layers_.push_back(std::move(layer));
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.w_full.size() + layer.bias.size();
    return n;
}

std::span<const double> Mlp::effective_weights(std::size_t layer) const {
    const LayerState& s = layers_.at(layer);
    if (setting_.weight_bits) return s.w_quant.reconstructed;
    return s.w_full;
}

void Mlp::refresh_quantized() {
    if (setting_.weight_bits) {
        for (auto& layer : layers_) layer.w_quant = quantize(layer.w_full, *setting_.weight_bits, lambdas_);
    }
    quant_stale_ = false;
}

void Mlp::mark_updated() noexcept {
    ++version_;
    quant_stale_ = true;
}

struct MlpAccess {
    static bool stale(const Mlp& net) { return net.quant_stale_; }
};

namespace {

double activate(Activation a, double z) {
    return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

double activate_derivative(Activation a, double z) {
    if (a == Activation::ReLU) return z > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(z);
    return 1.0 - t * t;
}

}  // namespace

double update_ema(double sigma_ema, double sigma_batch, double momentum) {
    return momentum * sigma_ema + (1.0 - momentum) * sigma_batch;
}

WeightVector quantize_activation(std::span<const double> a, int bits, double sigma,
                                 const LambdaTemplate& lambdas) {
    if (!(sigma > 0.0)) fail(ErrorCode::InvalidArgument, "activation sigma must be positive");
    const CodeVector codes = steer(a, lambdas.at(bits) * sigma, bits);
    if (squared_norm(a) == 0.0) return WeightVector(a.begin(), a.end());
    return drive(a, codes).reconstructed;
}

ForwardOutput forward(Mlp& net, const Matrix& batch, Mode mode) {
    auto& layers = net.layers();
    if (batch.rows == 0) fail(ErrorCode::EmptyInput, "empty batch");
    if (batch.cols != layers.front().inputs) {
        fail(ErrorCode::LengthMismatch, "batch width " + std::to_string(batch.cols) +
                                            " does not match input width " +
                                            std::to_string(layers.front().inputs));
    }
    if (mode == Mode::Train || MlpAccess::stale(net)) net.refresh_quantized();

    ForwardOutput out;
    out.cache.version = net.version();
    Matrix x = batch;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        LayerState& layer = layers[l];
        const std::span<const double> w = net.effective_weights(l);
        Matrix z(x.rows, layer.outputs);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double* xr = x.data.data() + r * x.cols;
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double* wo = w.data() + o * layer.inputs;
                double s = layer.bias[o];
                for (std::size_t i = 0; i < layer.inputs; ++i) s += wo[i] * xr[i];
                z(r, o) = s;
            }
        }
        out.cache.layer_inputs.push_back(std::move(x));
        const bool last = l + 1 == layers.size();
        if (last) {
            out.logits = z;
            out.cache.pre_activations.push_back(std::move(z));
            break;
        }
        Matrix a(z.rows, z.cols);
        std::transform(z.data.begin(), z.data.end(), a.data.begin(),
                       [&](double v) { return activate(net.activation(), v); });
        if (const auto& bits = net.setting().activation_bits) {
            double sigma;
            if (mode == Mode::Train) {
                sigma = stats(a.data).stddev();
                layer.act_sigma_ema = layer.ema_initialized
                                          ? update_ema(layer.act_sigma_ema, sigma, layer.ema_momentum)
                                          : sigma;
                layer.ema_initialized = true;
            } else {
                sigma = layer.ema_initialized ? layer.act_sigma_ema : stats(a.data).stddev();
            }
            if (sigma > 0.0) a.data = quantize_activation(a.data, *bits, sigma, net.lambdas());
        }
        out.cache.pre_activations.push_back(std::move(z));
        x = std::move(a);
    }
    return out;
}

std::vector<LayerGradients> compute_gradients(const Mlp& net, const ForwardCache& cache,
                                              const Matrix& grad_logits) {
    const auto& layers = net.layers();
    if (cache.version != net.version() || cache.layer_inputs.size() != layers.size()) {
        fail(ErrorCode::StaleCache, "forward cache does not match the current network");
    }
    const std::size_t rows = cache.layer_inputs.front().rows;
    if (grad_logits.rows != rows || grad_logits.cols != layers.back().outputs) {
        fail(ErrorCode::LengthMismatch, "gradient shape does not match the logits");
    }

    std::vector<LayerGradients> grads(layers.size());
    Matrix delta = grad_logits;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const LayerState& layer = layers[l];
        const Matrix& x = cache.layer_inputs[l];
        LayerGradients& g = grads[l];
        g.weights.assign(layer.outputs * layer.inputs, 0.0);
        g.bias.assign(layer.outputs, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta(r, o);
                g.bias[o] += d;
                double* go = g.weights.data() + o * layer.inputs;
                const double* xr = x.data.data() + r * x.cols;
                for (std::size_t i = 0; i < layer.inputs; ++i) go[i] += d * xr[i];
            }
        }
        if (l == 0) break;

        // Propagate through the weights used in the forward pass; the
        // activation quantizer passes gradients straight through.
        const std::span<const double> w = net.effective_weights(l);
        const Matrix& z_prev = cache.pre_activations[l - 1];
        Matrix next(rows, layer.inputs);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta(r, o);
                const double* wo = w.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) next(r, i) += d * wo[i];
            }
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                next(r, i) *= activate_derivative(net.activation(), z_prev(r, i));
            }
        }
        delta = std::move(next);
    }
    return grads;
}

void apply_gradients(Mlp& net, const std::vector<LayerGradients>& grads, double lr) {
    auto& layers = net.layers();
    if (grads.size() != layers.size()) fail(ErrorCode::LengthMismatch, "gradient layer count");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        LayerState& layer = layers[l];
        for (std::size_t i = 0; i < layer.w_full.size(); ++i) layer.w_full[i] -= lr * grads[l].weights[i];
        for (std::size_t o = 0; o < layer.bias.size(); ++o) layer.bias[o] -= lr * grads[l].bias[o];
    }
    net.mark_updated();
}

void backward_and_update(Mlp& net, const ForwardCache& cache, const Matrix& grad_logits, double lr) {
    apply_gradients(net, compute_gradients(net, cache, grad_logits), lr);
}

LossOutput softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
    if (labels.size() != logits.rows) fail(ErrorCode::LengthMismatch, "label count");
    LossOutput out;
    out.grad_logits = Matrix(logits.rows, logits.cols);
    const double inv_rows = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto row = logits.row(r);
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols) {
            fail(ErrorCode::InvalidArgument, "label out of range");
        }
        const double peak = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (double v : row) total += std::exp(v - peak);
        const double log_total = std::log(total) + peak;
        out.loss += (log_total - row[y]) * inv_rows;
        std::size_t argmax = 0;
        for (std::size_t c = 0; c < logits.cols; ++c) {
            const double p = std::exp(row[c] - log_total);
            out.grad_logits(r, c) = (p - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_rows;
            if (row[c] > row[argmax]) argmax = c;
        }
        if (static_cast<int>(argmax) == y) ++out.correct;
    }
    return out;
}

void TrainConfig::validate() const {
    if (dataset != "moons" && dataset != "mnist") {
        fail(ErrorCode::InvalidArgument, "dataset must be \"moons\" or \"mnist\"");
    }
    if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) fail(ErrorCode::InvalidArgument, "learning_rate must be >= 0");
    if (!(lr_decay > 0.0)) fail(ErrorCode::InvalidArgument, "lr_decay must be > 0");
    if (!(ema_momentum > 0.0 && ema_momentum < 1.0)) {
        fail(ErrorCode::InvalidArgument, "ema_momentum must lie in (0, 1)");
    }
    if (settings.empty()) fail(ErrorCode::InvalidArgument, "no W/A settings requested");
    for (const auto& s : settings) {
        if (s.weight_bits && (*s.weight_bits < 1 || *s.weight_bits > 8)) {
            fail(ErrorCode::InvalidArgument, "weight bits must lie in [1, 8]");
        }
        if (s.activation_bits && *s.activation_bits != 8) {
            fail(ErrorCode::InvalidArgument, "activation bits must be 8 or full");
        }
    }
    if (dataset == "moons" && (train_size < 2 || test_size < 2)) {
        fail(ErrorCode::InvalidArgument, "moons needs at least two samples per split");
    }
}

namespace {

std::optional<int> parse_bits_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "full" || s == "32") return std::nullopt;
        return std::stoi(s);
    }
    const int bits = v.get<int>();
    if (bits == 32) return std::nullopt;
    return bits;
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text) {
    TrainConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        c.dataset = j.value("dataset", c.dataset);
        if (j.contains("mnist")) {
            const auto& m = j.at("mnist");
            c.mnist_images = m.value("train_images", "");
            c.mnist_labels = m.value("train_labels", "");
            c.mnist_test_images = m.value("test_images", "");
            c.mnist_test_labels = m.value("test_labels", "");
        }
        c.train_size = j.value("train_size", c.train_size);
        c.test_size = j.value("test_size", c.test_size);
        c.noise = j.value("noise", c.noise);
        c.hidden = j.value("hidden", c.hidden);
        const std::string act = j.value("activation", std::string("relu"));
        if (act == "relu") {
            c.activation = Activation::ReLU;
        } else if (act == "tanh") {
            c.activation = Activation::Tanh;
        } else {
            fail(ErrorCode::InvalidArgument, "activation must be relu or tanh");
        }
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.lr_decay = j.value("lr_decay", c.lr_decay);
        c.seed = j.value("seed", c.seed);
        c.ema_momentum = j.value("ema_momentum", c.ema_momentum);
        if (j.contains("settings")) {
            c.settings.clear();
            for (const auto& s : j.at("settings")) {
                c.settings.push_back({parse_bits_field(s, "w"), parse_bits_field(s, "a")});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedJson, std::string("train config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        fail(ErrorCode::MalformedJson, std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

double evaluate(Mlp& net, const Dataset& data, double* mean_loss) {
    constexpr std::size_t kChunk = 256;
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < data.size(); start += kChunk) {
        const std::size_t n = std::min(kChunk, data.size() - start);
        Matrix x(n, data.inputs.cols);
        std::copy_n(data.inputs.data.begin() + static_cast<std::ptrdiff_t>(start * data.inputs.cols),
                    n * data.inputs.cols, x.data.begin());
        const auto fwd = forward(net, x, Mode::Inference);
        const auto loss = softmax_cross_entropy(
            fwd.logits, std::span<const int>(data.labels).subspan(start, n));
        correct += loss.correct;
        loss_sum += loss.loss * static_cast<double>(n);
    }
    if (mean_loss) *mean_loss = loss_sum / static_cast<double>(data.size());
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

std::pair<Dataset, Dataset> load_data(const TrainConfig& config) {
    if (config.dataset == "moons") {
        return {make_moons(config.train_size, config.noise, config.seed),
                make_moons(config.test_size, config.noise, config.seed ^ 0x9e3779b97f4a7c15ull)};
    }
    if (config.mnist_images.empty() || config.mnist_labels.empty() ||
        config.mnist_test_images.empty() || config.mnist_test_labels.empty()) {
        fail(ErrorCode::InvalidArgument, "mnist needs train/test image and label paths");
    }
    return {load_mnist_idx(config.mnist_images, config.mnist_labels, config.train_size),
            load_mnist_idx(config.mnist_test_images, config.mnist_test_labels, config.test_size)};
}

SettingReport train_one(const TrainConfig& config, const QuantSetting& setting,
                        const Dataset& train, const Dataset& test) {
    std::vector<std::size_t> widths = {train.inputs.cols};
    widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
    widths.push_back(static_cast<std::size_t>(std::max(train.classes, test.classes)));

    Mlp net(widths, config.activation, setting, config.seed, config.ema_momentum);
    std::mt19937_64 rng(config.seed + 1);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    SettingReport report;
    report.setting = setting;
    double lr = config.learning_rate;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t n = std::min(config.batch_size, order.size() - start);
            Matrix x(n, train.inputs.cols);
            std::vector<int> y(n);
            for (std::size_t r = 0; r < n; ++r) {
                const auto src = train.inputs.row(order[start + r]);
                std::copy(src.begin(), src.end(), x.data.begin() + static_cast<std::ptrdiff_t>(r * x.cols));
                y[r] = train.labels[order[start + r]];
            }
            const auto fwd = forward(net, x, Mode::Train);
            const auto loss = softmax_cross_entropy(fwd.logits, y);
            backward_and_update(net, fwd.cache, loss.grad_logits, lr);
        }
        lr *= config.lr_decay;

        double train_loss = 0.0;
        double test_loss = 0.0;
        const double train_acc = evaluate(net, train, &train_loss);
        const double test_acc = evaluate(net, test, &test_loss);
        report.epochs.push_back({epoch, "train", train_acc, train_loss});
        report.epochs.push_back({epoch, "test", test_acc, test_loss});
        report.final_train_accuracy = train_acc;
        report.final_test_accuracy = test_acc;
    }
    return report;
}

}  // namespace

TrainReport train_demo(const TrainConfig& config) {
    config.validate();
    const auto [train, test] = load_data(config);
    TrainReport report;
    for (const auto& setting : config.settings) {
        report.settings.push_back(train_one(config, setting, train, test));
    }
    return report;
}

void write_metrics_jsonl(std::ostream& out, const TrainReport& report) {
    for (const auto& s : report.settings) {
        for (const auto& e : s.epochs) {
            nlohmann::json j = {{"epoch", e.epoch},
                                {"split", e.split},
                                {"accuracy", e.accuracy},
                                {"loss", e.loss},
                                {"setting", s.setting.label()}};
            out << j.dump() << '\n';
        }
    }
}

}  // namespace vecq
