#include "crn/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <vector>

#include <omp.h>

namespace crn::kernels {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 15;
}  // namespace

void dense_forward(const DenseView& layer, std::span<const double> input, std::span<double> output,
                   std::size_t batch, bool relu, Exec exec) {
    if (exec == Exec::serial) {
        serial::dense_forward(layer, input, output, batch, relu);
    } else {
        parallel::dense_forward(layer, input, output, batch, relu);
    }
}

void dense_backward(const DenseView& layer, std::span<const double> input,
                    std::span<const double> output_grad, const DenseGradView& grad,
                    std::span<double> input_grad, std::size_t batch, Exec exec) {
    if (exec == Exec::serial) {
        serial::dense_backward(layer, input, output_grad, grad, input_grad, batch);
    } else {
        parallel::dense_backward(layer, input, output_grad, grad, input_grad, batch);
    }
}

void relu_backward(std::span<const double> activation, std::span<double> grad, Exec exec) {
    if (exec == Exec::serial) {
        serial::relu_backward(activation, grad);
    } else {
        parallel::relu_backward(activation, grad);
    }
}

namespace serial {

void dense_forward(const DenseView& layer, std::span<const double> input, std::span<double> output,
                   std::size_t batch, bool relu) {
    assert(input.size() >= batch * layer.in && output.size() >= batch * layer.out);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < layer.out; ++o) {
            double acc = layer.bias[o];
            for (std::size_t i = 0; i < layer.in; ++i) {
                acc += layer.weights[o * layer.in + i] * input[b * layer.in + i];
            }
            output[b * layer.out + o] = relu ? std::max(acc, 0.0) : acc;
        }
    }
}

void dense_backward(const DenseView& layer, std::span<const double> input,
                    std::span<const double> output_grad, const DenseGradView& grad,
                    std::span<double> input_grad, std::size_t batch) {
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = output_grad[b * layer.out + o];
            grad.bias[o] += d;
            for (std::size_t i = 0; i < layer.in; ++i) {
                grad.weights[o * layer.in + i] += d * input[b * layer.in + i];
            }
        }
    }
    if (input_grad.empty()) return;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < layer.in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < layer.out; ++o) {
                acc += output_grad[b * layer.out + o] * layer.weights[o * layer.in + i];
            }
            input_grad[b * layer.in + i] = acc;
        }
    }
}

void relu_backward(std::span<const double> activation, std::span<double> grad) {
    for (std::size_t k = 0; k < grad.size(); ++k) {
        if (activation[k] <= 0.0) grad[k] = 0.0;
    }
}

}  // namespace serial

namespace parallel {

namespace {

// Runs body(lo, hi) over [0, n): split across an OpenMP team when the work is
// large enough and a team would actually have more than one thread, otherwise
// called inline. Entering a region costs microseconds even with one thread.
template <typename Body>
void for_range(std::size_t n, std::size_t work, Body&& body) {
    const bool team = work >= kParallelWork && !omp_in_parallel() && omp_get_max_threads() > 1;
    if (!team) {
        body(std::size_t{0}, n);
        return;
    }
#pragma omp parallel
    {
        const auto threads = static_cast<std::size_t>(omp_get_num_threads());
        const auto id = static_cast<std::size_t>(omp_get_thread_num());
        const std::size_t chunk = (n + threads - 1) / threads;
        const std::size_t lo = std::min(n, id * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) body(lo, hi);
    }
}

}  // namespace

void dense_forward(const DenseView& layer, std::span<const double> input, std::span<double> output,
                   std::size_t batch, bool relu) {
    const std::size_t in = layer.in;
    const std::size_t out = layer.out;
    const double* bias = layer.bias.data();
    const double* x = input.data();
    double* y = output.data();

    // W^T lets every update run along contiguous outputs, with no horizontal
    // reductions; that matters for the narrow input and output layers.
    thread_local std::vector<double> wt;
    wt.resize(in * out);
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) wt[i * out + o] = layer.weights[o * in + i];
    }
    const double* wtp = wt.data();

    for_range(batch, batch * in * out, [=](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
            const double* xb = x + b * in;
            double* yb = y + b * out;
            std::copy(bias, bias + out, yb);
            for (std::size_t i = 0; i < in; ++i) {
                const double xi = xb[i];
                const double* row = wtp + i * out;
#pragma omp simd
                for (std::size_t o = 0; o < out; ++o) yb[o] += xi * row[o];
            }
            if (relu) {
#pragma omp simd
                for (std::size_t o = 0; o < out; ++o) yb[o] = std::max(yb[o], 0.0);
            }
        }
    });
}

void dense_backward(const DenseView& layer, std::span<const double> input,
                    std::span<const double> output_grad, const DenseGradView& grad,
                    std::span<double> input_grad, std::size_t batch) {
    const std::size_t in = layer.in;
    const std::size_t out = layer.out;
    const double* w = layer.weights.data();
    const double* x = input.data();
    const double* dy = output_grad.data();
    double* dw = grad.weights.data();
    double* db = grad.bias.data();
    const std::size_t work = batch * in * out;

    // Each thread owns whole rows of dW, so no reduction across threads is needed.
    // Batch rows go four at a time into one pass over the dW row.
    for_range(out, work, [=](std::size_t lo, std::size_t hi) {
        for (std::size_t o = lo; o < hi; ++o) {
            double* dwo = dw + o * in;
            double bias_acc = 0.0;
            std::size_t b = 0;
            for (; b + 4 <= batch; b += 4) {
                const double d0 = dy[b * out + o];
                const double d1 = dy[(b + 1) * out + o];
                const double d2 = dy[(b + 2) * out + o];
                const double d3 = dy[(b + 3) * out + o];
                if (d0 == 0.0 && d1 == 0.0 && d2 == 0.0 && d3 == 0.0) continue;
                bias_acc += (d0 + d1) + (d2 + d3);
                const double* x0 = x + b * in;
                const double* x1 = x0 + in;
                const double* x2 = x1 + in;
                const double* x3 = x2 + in;
#pragma omp simd
                for (std::size_t i = 0; i < in; ++i) {
                    dwo[i] += (d0 * x0[i] + d1 * x1[i]) + (d2 * x2[i] + d3 * x3[i]);
                }
            }
            for (; b < batch; ++b) {
                const double d = dy[b * out + o];
                if (d == 0.0) continue;
                bias_acc += d;
                const double* xb = x + b * in;
#pragma omp simd
                for (std::size_t i = 0; i < in; ++i) dwo[i] += d * xb[i];
            }
            db[o] += bias_acc;
        }
    });

    if (input_grad.empty()) return;
    double* dx = input_grad.data();
    for_range(batch, work, [=](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
            double* dxb = dx + b * in;
            const double* dyb = dy + b * out;
            std::fill(dxb, dxb + in, 0.0);
            std::size_t o = 0;
            for (; o + 4 <= out; o += 4) {
                const double d0 = dyb[o], d1 = dyb[o + 1], d2 = dyb[o + 2], d3 = dyb[o + 3];
                if (d0 == 0.0 && d1 == 0.0 && d2 == 0.0 && d3 == 0.0) continue;
                const double* w0 = w + o * in;
                const double* w1 = w0 + in;
                const double* w2 = w1 + in;
                const double* w3 = w2 + in;
#pragma omp simd
                for (std::size_t i = 0; i < in; ++i) {
                    dxb[i] += (d0 * w0[i] + d1 * w1[i]) + (d2 * w2[i] + d3 * w3[i]);
                }
            }
            for (; o < out; ++o) {
                const double d = dyb[o];
                if (d == 0.0) continue;
                const double* wo = w + o * in;
#pragma omp simd
                for (std::size_t i = 0; i < in; ++i) dxb[i] += d * wo[i];
            }
        }
    });
}

void relu_backward(std::span<const double> activation, std::span<double> grad) {
    const double* a = activation.data();
    double* g = grad.data();
    for_range(grad.size(), grad.size(), [=](std::size_t lo, std::size_t hi) {
#pragma omp simd
        for (std::size_t k = lo; k < hi; ++k) g[k] = a[k] > 0.0 ? g[k] : 0.0;
    });
}

}  // namespace parallel

}  // namespace crn::kernels
