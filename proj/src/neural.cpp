#include "crn/neural.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace crn::nn {

void NetSpec::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("net: need at least two layer sizes");
    for (std::size_t s : layer_sizes) {
        if (s < 1) throw std::invalid_argument("net: layer sizes must be >= 1");
    }
}

Params Params::zeros(const NetSpec& spec) {
    spec.validate();
    Params p;
    for (std::size_t k = 0; k + 1 < spec.layer_sizes.size(); ++k) {
        p.layers.emplace_back(spec.layer_sizes[k], spec.layer_sizes[k + 1]);
    }
    return p;
}

NetSpec Params::spec() const {
    NetSpec s;
    if (layers.empty()) return s;
    s.layer_sizes.push_back(layers.front().in);
    for (const auto& l : layers) s.layer_sizes.push_back(l.out);
    return s;
}

std::size_t Params::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

bool Params::same_shape(const Params& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (layers[k].in != other.layers[k].in || layers[k].out != other.layers[k].out) return false;
    }
    return true;
}

bool Params::all_finite() const {
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(layers.begin(), layers.end(), [&](const DenseLayer& l) {
        return std::all_of(l.weights.begin(), l.weights.end(), finite) &&
               std::all_of(l.bias.begin(), l.bias.end(), finite);
    });
}

void Params::fill(double value) {
    for (auto& l : layers) {
        std::fill(l.weights.begin(), l.weights.end(), value);
        std::fill(l.bias.begin(), l.bias.end(), value);
    }
}

Params init_params(const NetSpec& spec, Rng& rng) {
    Params p = Params::zeros(spec);
    for (auto& l : p.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : l.weights) w = dist(rng);
    }
    return p;
}

void Workspace::prepare(const Params& params, std::size_t batch_size) {
    batch = batch_size;
    activations.resize(params.layers.size() + 1);
    deltas.resize(params.layers.size() + 1);
    activations[0].resize(batch_size * params.input_size());
    deltas[0].clear();
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        activations[k + 1].resize(batch_size * params.layers[k].out);
        deltas[k + 1].resize(batch_size * params.layers[k].out);
    }
}

namespace {

void run_layers(const Params& params, Workspace& ws, Exec exec) {
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        kernels::dense_forward(params.layers[k].view(), ws.activations[k], ws.activations[k + 1],
                               ws.batch, k != last, exec);
    }
}

}  // namespace

std::vector<double> forward(const Params& params, std::span<const double> x, Exec exec) {
    if (params.layers.empty()) throw std::invalid_argument("forward: empty network");
    if (x.size() != params.input_size())
        throw std::invalid_argument("forward: expected " + std::to_string(params.input_size()) +
                                    " inputs, got " + std::to_string(x.size()));
    Workspace ws;
    const auto out = forward_batch(params, x, 1, ws, exec);
    return {out.begin(), out.end()};
}

std::span<const double> forward_batch(const Params& params, std::span<const double> inputs,
                                      std::size_t batch, Workspace& ws, Exec exec) {
    if (params.layers.empty()) throw std::invalid_argument("forward: empty network");
    if (inputs.size() != batch * params.input_size())
        throw std::invalid_argument("forward: input block has wrong size");
    ws.prepare(params, batch);
    std::copy(inputs.begin(), inputs.end(), ws.activations[0].begin());
    run_layers(params, ws, exec);
    return ws.activations.back();
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size())
        throw std::invalid_argument("mse_loss: prediction and target lengths differ");
    if (pred.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

namespace {

void check_batch(const Params& params, const MaskedBatch& batch) {
    if (params.layers.empty()) throw std::invalid_argument("grad: empty network");
    if (batch.size() == 0) throw std::invalid_argument("grad: empty batch");
    if (batch.actions.size() != batch.size() ||
        batch.inputs.size() != batch.size() * params.input_size())
        throw std::invalid_argument("grad: batch arrays have inconsistent sizes");
    for (std::size_t a : batch.actions) {
        if (a >= params.output_size()) throw std::invalid_argument("grad: action index out of range");
    }
}

}  // namespace

double masked_loss(const Params& params, const MaskedBatch& batch) {
    check_batch(params, batch);
    Workspace ws;
    const auto q = forward_batch(params, batch.inputs, batch.size(), ws, Exec::serial);
    const std::size_t width = params.output_size();
    double sum = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const double d = q[b * width + batch.actions[b]] - batch.targets[b];
        sum += d * d;
    }
    return sum / static_cast<double>(batch.size());
}

double masked_loss_grad(const Params& params, const MaskedBatch& batch, Gradient& grad,
                        Workspace& ws, Exec exec) {
    check_batch(params, batch);
    if (!grad.same_shape(params)) grad = Params::zeros(params.spec());
    grad.fill(0.0);

    const std::size_t n = batch.size();
    forward_batch(params, batch.inputs, n, ws, exec);

    const std::size_t layers = params.layers.size();
    const std::size_t width = params.output_size();
    const auto& q = ws.activations[layers];
    auto& top = ws.deltas[layers];
    std::fill(top.begin(), top.end(), 0.0);
    double sum = 0.0;
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t idx = b * width + batch.actions[b];
        const double residual = q[idx] - batch.targets[b];
        sum += residual * residual;
        top[idx] = scale * residual;
    }

    for (std::size_t k = layers; k-- > 0;) {
        std::span<double> below;
        if (k > 0) below = ws.deltas[k];
        kernels::dense_backward(params.layers[k].view(), ws.activations[k], ws.deltas[k + 1],
                                grad.layers[k].grad_view(), below, n, exec);
        if (k > 0) kernels::relu_backward(ws.activations[k], ws.deltas[k], exec);
    }
    return sum / static_cast<double>(n);
}

Gradient grad(const Params& params, const MaskedBatch& batch, Exec exec) {
    Gradient g;
    Workspace ws;
    masked_loss_grad(params, batch, g, ws, exec);
    return g;
}

void sgd_update(Params& params, const Gradient& gradient, double alpha) {
    if (!params.same_shape(gradient)) throw std::invalid_argument("sgd_update: shape mismatch");
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto& p = params.layers[k];
        const auto& g = gradient.layers[k];
#pragma omp simd
        for (std::size_t i = 0; i < p.weights.size(); ++i) p.weights[i] -= alpha * g.weights[i];
        for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= alpha * g.bias[i];
    }
}

namespace {

void put(std::ostream& os, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, res.ptr - buf);
    os.put('\n');
}

double get(std::istream& is, const char* what) {
    std::string token;
    if (!(is >> token)) throw std::runtime_error(std::string("snapshot truncated reading ") + what);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw std::runtime_error("snapshot: bad number '" + token + "'");
    return v;
}

std::size_t get_size(std::istream& is, const char* what) {
    const double v = get(is, what);
    if (v < 0 || v != std::floor(v)) throw std::runtime_error(std::string("snapshot: bad ") + what);
    return static_cast<std::size_t>(v);
}

}  // namespace

void write_params(std::ostream& os, const Params& params) {
    const NetSpec spec = params.spec();
    os << spec.layer_sizes.size() << '\n';
    for (std::size_t s : spec.layer_sizes) os << s << '\n';
    for (const auto& l : params.layers) {
        for (double w : l.weights) put(os, w);
        for (double b : l.bias) put(os, b);
    }
}

Params read_params(std::istream& is) {
    NetSpec spec;
    const std::size_t count = get_size(is, "layer count");
    for (std::size_t k = 0; k < count; ++k) spec.layer_sizes.push_back(get_size(is, "layer size"));
    Params p;
    try {
        p = Params::zeros(spec);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("snapshot: ") + e.what());
    }
    for (auto& l : p.layers) {
        for (double& w : l.weights) w = get(is, "weights");
        for (double& b : l.bias) b = get(is, "bias");
    }
    return p;
}

void save_params(const std::filesystem::path& path, const Params& params) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_params(os, params);
    if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Params load_params(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    return read_params(is);
}

}  // namespace crn::nn
