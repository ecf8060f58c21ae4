#pragma once

#include <cstddef>
#include <span>

// Dense-layer kernels over a mini-batch. Each kernel has a plain serial
// reference and an OpenMP version; tests hold them to the same results and
// bench/ compares their speed.
//
// Layouts, all row-major:
//   weights  [out x in]
//   input    [batch x in]
//   output   [batch x out]

namespace crn::kernels {

enum class Exec { serial, parallel };

struct DenseView {
    std::size_t in = 0;
    std::size_t out = 0;
    std::span<const double> weights;
    std::span<const double> bias;
};

struct DenseGradView {
    std::span<double> weights;
    std::span<double> bias;
};

/// output = input * W^T + b, optionally passed through max(0, .).
void dense_forward(const DenseView& layer, std::span<const double> input, std::span<double> output,
                   std::size_t batch, bool relu, Exec exec);

/// Accumulates dW += dY^T X and db += sum_b dY into grad. If input_grad is
/// non-empty it receives dX = dY W (overwritten, not accumulated).
void dense_backward(const DenseView& layer, std::span<const double> input,
                    std::span<const double> output_grad, const DenseGradView& grad,
                    std::span<double> input_grad, std::size_t batch, Exec exec);

/// grad[i] = 0 where activation[i] <= 0.
void relu_backward(std::span<const double> activation, std::span<double> grad, Exec exec);

namespace serial {
void dense_forward(const DenseView& layer, std::span<const double> input, std::span<double> output,
                   std::size_t batch, bool relu);
void dense_backward(const DenseView& layer, std::span<const double> input,
                    std::span<const double> output_grad, const DenseGradView& grad,
                    std::span<double> input_grad, std::size_t batch);
void relu_backward(std::span<const double> activation, std::span<double> grad);
}  // namespace serial

namespace parallel {
void dense_forward(const DenseView& layer, std::span<const double> input, std::span<double> output,
                   std::size_t batch, bool relu);
void dense_backward(const DenseView& layer, std::span<const double> input,
                    std::span<const double> output_grad, const DenseGradView& grad,
                    std::span<double> input_grad, std::size_t batch);
void relu_backward(std::span<const double> activation, std::span<double> grad);
}  // namespace parallel

}  // namespace crn::kernels
