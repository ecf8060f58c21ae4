#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "crn/fading.hpp"
#include "crn/kernels.hpp"

namespace crn::nn {

using kernels::Exec;

/// Layer widths from input to output. Hidden layers use max(0, x); the output is linear.
struct NetSpec {
    std::vector<std::size_t> layer_sizes;

    /// Throws std::invalid_argument unless there are >= 2 sizes, all >= 1.
    void validate() const;

    friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // [out x in], row-major
    std::vector<double> bias;     // [out]

    DenseLayer() = default;
    DenseLayer(std::size_t in_size, std::size_t out_size)
        : in(in_size), out(out_size), weights(in_size * out_size, 0.0), bias(out_size, 0.0) {}

    [[nodiscard]] kernels::DenseView view() const { return {in, out, weights, bias}; }
    [[nodiscard]] kernels::DenseGradView grad_view() { return {weights, bias}; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Params {
    std::vector<DenseLayer> layers;

    /// All-zero parameters shaped after spec.
    static Params zeros(const NetSpec& spec);

    [[nodiscard]] NetSpec spec() const;
    [[nodiscard]] std::size_t input_size() const { return layers.front().in; }
    [[nodiscard]] std::size_t output_size() const { return layers.back().out; }
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] bool same_shape(const Params& other) const;
    [[nodiscard]] bool all_finite() const;
    void fill(double value);

    friend bool operator==(const Params&, const Params&) = default;
};

/// Gradients share the parameter layout.
using Gradient = Params;

/// Weights ~ U(+-sqrt(6 / (fan_in + fan_out))), biases zero.
Params init_params(const NetSpec& spec, Rng& rng);

/// Scratch buffers for batched passes; reused across calls to avoid allocation.
class Workspace {
public:
    /// activations[0] is the input copy, activations[k] the output of layer k-1.
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> deltas;
    std::size_t batch = 0;

    void prepare(const Params& params, std::size_t batch_size);
};

/// Single-sample forward pass. Throws std::invalid_argument on a size mismatch.
std::vector<double> forward(const Params& params, std::span<const double> x,
                            Exec exec = Exec::serial);

/// Batched forward pass; inputs are [batch x input_size] row-major. The
/// returned span views ws and stays valid until ws is next used.
std::span<const double> forward_batch(const Params& params, std::span<const double> inputs,
                                      std::size_t batch, Workspace& ws, Exec exec);

/// Mean of squared differences. Throws std::invalid_argument on a length mismatch.
double mse_loss(std::span<const double> pred, std::span<const double> target);

/// Supervision for exactly one output per sample (the action taken).
struct MaskedBatch {
    std::vector<double> inputs;        // [size x input_size]
    std::vector<double> targets;       // [size]
    std::vector<std::size_t> actions;  // [size]

    [[nodiscard]] std::size_t size() const { return targets.size(); }
    void clear() {
        inputs.clear();
        targets.clear();
        actions.clear();
    }
};

/// (1/B) sum_b (Q(x_b)[a_b] - y_b)^2.
double masked_loss(const Params& params, const MaskedBatch& batch);

/// Backpropagated gradient of masked_loss. Writes into grad (reshaped and
/// zeroed as needed) and returns the loss at params.
/// Throws std::invalid_argument on an empty batch or a shape mismatch.
double masked_loss_grad(const Params& params, const MaskedBatch& batch, Gradient& grad,
                        Workspace& ws, Exec exec);

/// Convenience wrapper returning a fresh gradient.
Gradient grad(const Params& params, const MaskedBatch& batch, Exec exec = Exec::serial);

/// p <- p - alpha * g, elementwise. Throws std::invalid_argument on a shape mismatch.
void sgd_update(Params& params, const Gradient& gradient, double alpha);

// Snapshot format, one number per line: the layer count L+1, the L+1 layer
// widths, then per layer its [out x in] weights row-major followed by its bias.
void write_params(std::ostream& os, const Params& params);
Params read_params(std::istream& is);
void save_params(const std::filesystem::path& path, const Params& params);
Params load_params(const std::filesystem::path& path);

}  // namespace crn::nn
