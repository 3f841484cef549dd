#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"
#include "rlfuzz/rng.hpp"

namespace rlfuzz {

enum class Activation { tanh_fn, sigmoid, elu, softplus, softsign, relu };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::tanh_fn: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::elu: return "elu";
        case Activation::softplus: return "softplus";
        case Activation::softsign: return "softsign";
        case Activation::relu: return "relu";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::tanh_fn;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "elu") return Activation::elu;
    if (name == "softplus") return Activation::softplus;
    if (name == "softsign") return Activation::softsign;
    if (name == "relu") return Activation::relu;
    throw FormatError("unknown activation: " + name);
}

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::tanh_fn: return std::tanh(z);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::elu: return z > 0.0 ? z : std::expm1(z);
        case Activation::softplus: return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        case Activation::softsign: return z / (1.0 + std::abs(z));
        case Activation::relu: return z > 0.0 ? z : 0.0;
    }
    return z;
}

// Derivative at z, given the already-computed activation value h = activate(z).
inline double activate_deriv(Activation a, double z, double h) {
    switch (a) {
        case Activation::tanh_fn: return 1.0 - h * h;
        case Activation::sigmoid: return h * (1.0 - h);
        case Activation::elu: return z > 0.0 ? 1.0 : h + 1.0;
        case Activation::softplus: return 1.0 / (1.0 + std::exp(-z));
        case Activation::softsign: {
            double d = 1.0 + std::abs(z);
            return 1.0 / (d * d);
        }
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

struct NetworkConfig {
    std::size_t input_dim = 32;
    std::array<std::size_t, 2> hidden_dims = {0, 0};  // 0 = derive from input_dim
    std::size_t output_dim = 8;
    Activation activation = Activation::tanh_fn;
    double learning_rate = 0.02;
    double weight_init_max = 0.1;

    static std::size_t derive_hidden(std::size_t input_dim) {
        return std::clamp<std::size_t>(2 * input_dim, 64, 180);
    }

    NetworkConfig resolved() const {
        NetworkConfig c = *this;
        for (auto& h : c.hidden_dims)
            if (h == 0) h = derive_hidden(c.input_dim);
        return c;
    }

    // Structural checks done on every construction. The [64, 180] hidden
    // range is a fuzzing-configuration rule, checked where loop configs are
    // resolved; small ad-hoc nets (unit tests, toy problems) stay legal.
    void validate_structure() const {
        if (input_dim == 0 || output_dim == 0)
            throw ContractViolation("NetworkConfig: zero input/output dimension");
        for (std::size_t h : hidden_dims)
            if (h == 0) throw ContractViolation("NetworkConfig: unresolved hidden dimension");
        if (learning_rate <= 0.0) throw ContractViolation("NetworkConfig: learning_rate must be > 0");
        if (weight_init_max < 0.0) throw ContractViolation("NetworkConfig: negative weight_init_max");
    }

    void validate_hidden_range() const {
        for (std::size_t h : hidden_dims)
            if (h != 0 && (h < 64 || h > 180))
                throw ContractViolation("NetworkConfig: hidden size " + std::to_string(h) +
                                        " outside [64, 180]");
    }
};

struct Layer {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::vector<double> weights;  // row-major, weights[i * fan_out + j]
    std::vector<double> bias;

    double& w(std::size_t i, std::size_t j) { return weights[i * fan_out + j]; }
    double w(std::size_t i, std::size_t j) const { return weights[i * fan_out + j]; }

    bool operator==(const Layer&) const = default;
};

// Per-parameter gradients of the masked squared loss; same shapes as the net.
struct Gradients {
    std::array<std::vector<double>, 3> weights;
    std::array<std::vector<double>, 3> bias;
};

// Feedforward Q-function approximator: input -> hidden -> hidden -> linear
// output, one value per action, all obtained in a single forward pass.
class Network {
public:
    Network() = default;

    Network(const NetworkConfig& config, Rng& rng) {
        NetworkConfig c = config.resolved();
        c.validate_structure();
        config_ = c;
        std::array<std::size_t, 4> dims = {c.input_dim, c.hidden_dims[0], c.hidden_dims[1],
                                           c.output_dim};
        for (std::size_t l = 0; l < 3; ++l) {
            layers_[l].fan_in = dims[l];
            layers_[l].fan_out = dims[l + 1];
            layers_[l].weights.resize(dims[l] * dims[l + 1]);
            layers_[l].bias.resize(dims[l + 1]);
            for (double& w : layers_[l].weights) w = rng.real(c.weight_init_max);
            for (double& b : layers_[l].bias) b = rng.real(c.weight_init_max);
        }
    }

    const NetworkConfig& config() const { return config_; }
    std::size_t input_dim() const { return config_.input_dim; }
    std::size_t output_dim() const { return config_.output_dim; }
    const std::array<Layer, 3>& layers() const { return layers_; }
    std::array<Layer, 3>& layers() { return layers_; }

    bool operator==(const Network& other) const {
        return layers_ == other.layers_ && config_.activation == other.config_.activation;
    }

    std::vector<double> forward(const StateVector& state) const {
        ForwardPass fp;
        run_forward(state, fp);
        return fp.output;
    }

    // One SGD step on L = (target - Q(x, a))^2, gradients masked to the
    // selected action's output. Returns the pre-step loss.
    double train_step(const StateVector& state, std::size_t action_index, double target) {
        double loss = 0.0;
        Gradients g = compute_gradients(state, action_index, target, &loss);
        apply_gradients(g, config_.learning_rate);
        check_finite(loss, target);
        return loss;
    }

    Gradients compute_gradients(const StateVector& state, std::size_t action_index, double target,
                                double* loss_out = nullptr) const {
        if (action_index >= config_.output_dim)
            throw ContractViolation("train_step: action index out of range");
        if (!std::isfinite(target))
            throw NumericFault("train_step: non-finite target " + std::to_string(target));

        ForwardPass fp;
        run_forward(state, fp);
        double q = fp.output[action_index];
        double err = q - target;
        if (loss_out) *loss_out = err * err;

        Gradients g;
        for (std::size_t l = 0; l < 3; ++l) {
            g.weights[l].assign(layers_[l].weights.size(), 0.0);
            g.bias[l].assign(layers_[l].bias.size(), 0.0);
        }

        // Output layer is linear and only the selected action carries loss,
        // so its gradient column is the only nonzero one.
        double dq = 2.0 * err;
        const Layer& out = layers_[2];
        std::vector<double> dh2(out.fan_in, 0.0);
        for (std::size_t i = 0; i < out.fan_in; ++i) {
            g.weights[2][i * out.fan_out + action_index] = dq * fp.hidden[1][i];
            dh2[i] = dq * out.w(i, action_index);
        }
        g.bias[2][action_index] = dq;

        std::vector<double> delta = std::move(dh2);
        for (std::size_t l = 2; l-- > 0;) {
            const Layer& layer = layers_[l];
            std::vector<double> dprev(layer.fan_in, 0.0);
            for (std::size_t j = 0; j < layer.fan_out; ++j) {
                double dz = delta[j] * activate_deriv(config_.activation, fp.pre[l][j], fp.hidden[l][j]);
                g.bias[l][j] = dz;
                const std::vector<double>& in = l == 0 ? state : fp.hidden[l - 1];
                for (std::size_t i = 0; i < layer.fan_in; ++i) {
                    g.weights[l][i * layer.fan_out + j] = dz * in[i];
                    dprev[i] += dz * layer.w(i, j);
                }
            }
            delta = std::move(dprev);
        }
        return g;
    }

    void apply_gradients(const Gradients& g, double learning_rate) {
        for (std::size_t l = 0; l < 3; ++l) {
            for (std::size_t k = 0; k < layers_[l].weights.size(); ++k)
                layers_[l].weights[k] -= learning_rate * g.weights[l][k];
            for (std::size_t k = 0; k < layers_[l].bias.size(); ++k)
                layers_[l].bias[k] -= learning_rate * g.bias[l][k];
        }
    }

private:
    struct ForwardPass {
        std::array<std::vector<double>, 2> pre;     // pre-activations z per hidden layer
        std::array<std::vector<double>, 2> hidden;  // activations h per hidden layer
        std::vector<double> output;
    };

    void run_forward(const StateVector& state, ForwardPass& fp) const {
        if (state.size() != config_.input_dim)
            throw ShapeError("forward: state has " + std::to_string(state.size()) +
                             " values, network expects " + std::to_string(config_.input_dim));
        const std::vector<double>* in = &state;
        for (std::size_t l = 0; l < 2; ++l) {
            const Layer& layer = layers_[l];
            fp.pre[l].assign(layer.fan_out, 0.0);
            fp.hidden[l].resize(layer.fan_out);
            for (std::size_t i = 0; i < layer.fan_in; ++i) {
                double x = (*in)[i];
                if (x == 0.0) continue;
                const double* row = &layer.weights[i * layer.fan_out];
                for (std::size_t j = 0; j < layer.fan_out; ++j) fp.pre[l][j] += x * row[j];
            }
            for (std::size_t j = 0; j < layer.fan_out; ++j) {
                fp.pre[l][j] += layer.bias[j];
                fp.hidden[l][j] = activate(config_.activation, fp.pre[l][j]);
            }
            in = &fp.hidden[l];
        }
        const Layer& out = layers_[2];
        fp.output.assign(out.fan_out, 0.0);
        for (std::size_t i = 0; i < out.fan_in; ++i) {
            double x = fp.hidden[1][i];
            const double* row = &out.weights[i * out.fan_out];
            for (std::size_t j = 0; j < out.fan_out; ++j) fp.output[j] += x * row[j];
        }
        for (std::size_t j = 0; j < out.fan_out; ++j) fp.output[j] += out.bias[j];
    }

    void check_finite(double loss, double target) const {
        if (!std::isfinite(loss))
            throw NumericFault("train_step: non-finite loss (target=" + std::to_string(target) + ")");
        for (std::size_t l = 0; l < 3; ++l) {
            for (double w : layers_[l].weights)
                if (!std::isfinite(w))
                    throw NumericFault("train_step: weight in layer " + std::to_string(l) +
                                       " became non-finite (loss=" + std::to_string(loss) +
                                       ", target=" + std::to_string(target) + ")");
            for (double b : layers_[l].bias)
                if (!std::isfinite(b))
                    throw NumericFault("train_step: bias in layer " + std::to_string(l) +
                                       " became non-finite");
        }
    }

    NetworkConfig config_;
    std::array<Layer, 3> layers_;
};

namespace detail {

inline std::string format_hex_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

inline double parse_hex_double(const std::string& tok, const std::string& where) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v, std::chars_format::hex);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw FormatError("weights file: bad value \"" + tok + "\" in " + where);
    return v;
}

}  // namespace detail

// Text format with hex floats: bit-exact round trip, still diffable.
inline void save_weights(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write weights file: " + path);
    out << "rlfuzz-net 1\n";
    out << "activation " << activation_name(net.config().activation) << "\n";
    out << "learning_rate " << detail::format_hex_double(net.config().learning_rate) << "\n";
    out << "dims " << net.config().input_dim << " " << net.config().hidden_dims[0] << " "
        << net.config().hidden_dims[1] << " " << net.config().output_dim << "\n";
    for (std::size_t l = 0; l < 3; ++l) {
        const Layer& layer = net.layers()[l];
        out << "layer " << l << " " << layer.fan_in << " " << layer.fan_out << "\n";
        for (std::size_t k = 0; k < layer.weights.size(); ++k)
            out << detail::format_hex_double(layer.weights[k]) << (k + 1 == layer.weights.size() ? "\n" : " ");
        for (std::size_t k = 0; k < layer.bias.size(); ++k)
            out << detail::format_hex_double(layer.bias[k]) << (k + 1 == layer.bias.size() ? "\n" : " ");
    }
    if (!out) throw EnvironmentError("failed writing weights file: " + path);
}

inline Network load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot open weights file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "rlfuzz-net" || version != 1)
        throw FormatError("weights file: bad magic/version in " + path);

    std::string key, act_name;
    in >> key >> act_name;
    if (key != "activation") throw FormatError("weights file: expected activation line");
    Activation act = activation_from_name(act_name);

    std::string lr_tok;
    in >> key >> lr_tok;
    if (key != "learning_rate") throw FormatError("weights file: expected learning_rate line");
    double lr = detail::parse_hex_double(lr_tok, "learning_rate");

    std::array<std::size_t, 4> dims{};
    in >> key >> dims[0] >> dims[1] >> dims[2] >> dims[3];
    if (key != "dims" || !in) throw FormatError("weights file: expected dims line");

    NetworkConfig cfg;
    cfg.input_dim = dims[0];
    cfg.hidden_dims = {dims[1], dims[2]};
    cfg.output_dim = dims[3];
    cfg.activation = act;
    cfg.learning_rate = lr;
    cfg.weight_init_max = 0.0;
    Rng rng(0);
    Network net(cfg, rng);

    for (std::size_t l = 0; l < 3; ++l) {
        std::size_t idx = 0, fan_in = 0, fan_out = 0;
        in >> key >> idx >> fan_in >> fan_out;
        std::string where = "layer " + std::to_string(l);
        if (key != "layer" || !in || idx != l) throw FormatError("weights file: malformed " + where);
        Layer& layer = net.layers()[l];
        if (fan_in != layer.fan_in || fan_out != layer.fan_out)
            throw FormatError("weights file: " + where + " has dims " + std::to_string(fan_in) + "x" +
                              std::to_string(fan_out) + ", expected " + std::to_string(layer.fan_in) +
                              "x" + std::to_string(layer.fan_out));
        std::string tok;
        for (std::size_t k = 0; k < layer.weights.size(); ++k) {
            if (!(in >> tok))
                throw FormatError("weights file: " + where + " truncated after " + std::to_string(k) +
                                  " of " + std::to_string(layer.weights.size()) + " weights");
            layer.weights[k] = detail::parse_hex_double(tok, where);
        }
        for (std::size_t k = 0; k < layer.bias.size(); ++k) {
            if (!(in >> tok))
                throw FormatError("weights file: " + where + " truncated after " + std::to_string(k) +
                                  " of " + std::to_string(layer.bias.size()) + " biases");
            layer.bias[k] = detail::parse_hex_double(tok, where);
        }
    }
    return net;
}

}  // namespace rlfuzz
