// Serial reference kernels against the OpenMP versions on DQN-sized shapes.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "crn/dqn.hpp"
#include "crn/kernels.hpp"
#include "crn/neural.hpp"

namespace {

using crn::kernels::Exec;

struct Fixture {
    std::size_t in, out, batch;
    std::vector<double> w, b, x, y, dy, dw, db, dx;

    Fixture(std::size_t in_, std::size_t out_, std::size_t batch_)
        : in(in_), out(out_), batch(batch_), w(in * out), b(out), x(batch * in), y(batch * out),
          dy(batch * out), dw(in * out), db(out), dx(batch * in) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto* v : {&w, &b, &x, &dy}) {
            for (double& e : *v) e = u(rng);
        }
    }
    crn::kernels::DenseView view() const { return {in, out, w, b}; }
};

void BM_DenseForward(benchmark::State& state, Exec exec) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Fixture f(n, n, static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        crn::kernels::dense_forward(f.view(), f.x, f.y, f.batch, true, exec);
        benchmark::DoNotOptimize(f.y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.batch * f.in * f.out));
}

void BM_DenseBackward(benchmark::State& state, Exec exec) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Fixture f(n, n, static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        crn::kernels::dense_backward(f.view(), f.x, f.dy, {f.dw, f.db}, f.dx, f.batch, exec);
        benchmark::DoNotOptimize(f.dx.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(2 * f.batch * f.in * f.out));
}

void BM_TrainStep(benchmark::State& state, Exec exec) {
    crn::AgentConfig cfg;
    cfg.warmup = 64;
    crn::DqnAgent agent(cfg, 3, exec);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(crn::kFeatureCount), g(crn::kFeatureCount);
    for (int i = 0; i < 256; ++i) {
        for (auto& v : f) v = u(rng);
        for (auto& v : g) v = u(rng);
        agent.remember(f, static_cast<std::size_t>(i % 11), u(rng), g, i % 20 == 19);
    }
    for (auto _ : state) benchmark::DoNotOptimize(agent.train_step());
}

}  // namespace

BENCHMARK_CAPTURE(BM_DenseForward, serial, Exec::serial)->Args({64, 64})->Args({256, 256});
BENCHMARK_CAPTURE(BM_DenseForward, parallel, Exec::parallel)->Args({64, 64})->Args({256, 256});
BENCHMARK_CAPTURE(BM_DenseBackward, serial, Exec::serial)->Args({64, 64})->Args({256, 256});
BENCHMARK_CAPTURE(BM_DenseBackward, parallel, Exec::parallel)->Args({64, 64})->Args({256, 256});
BENCHMARK_CAPTURE(BM_TrainStep, serial, Exec::serial);
BENCHMARK_CAPTURE(BM_TrainStep, parallel, Exec::parallel);

BENCHMARK_MAIN();

namespace {

crn::nn::MaskedBatch random_batch(std::size_t n) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    crn::nn::MaskedBatch b;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < crn::kFeatureCount; ++i) b.inputs.push_back(u(rng));
        b.targets.push_back(u(rng));
        b.actions.push_back(k % 11);
    }
    return b;
}

void BM_NetForward(benchmark::State& state, Exec exec) {
    std::mt19937_64 rng(1);
    const auto params = crn::nn::init_params(crn::AgentConfig{}.net, rng);
    const auto batch = random_batch(64);
    crn::nn::Workspace ws;
    for (auto _ : state) {
        benchmark::DoNotOptimize(crn::nn::forward_batch(params, batch.inputs, 64, ws, exec).data());
    }
}

void BM_NetGrad(benchmark::State& state, Exec exec) {
    std::mt19937_64 rng(1);
    const auto params = crn::nn::init_params(crn::AgentConfig{}.net, rng);
    const auto batch = random_batch(64);
    crn::nn::Workspace ws;
    crn::nn::Gradient g;
    for (auto _ : state) {
        benchmark::DoNotOptimize(crn::nn::masked_loss_grad(params, batch, g, ws, exec));
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_NetForward, serial, Exec::serial);
BENCHMARK_CAPTURE(BM_NetForward, parallel, Exec::parallel);
BENCHMARK_CAPTURE(BM_NetGrad, serial, Exec::serial);
BENCHMARK_CAPTURE(BM_NetGrad, parallel, Exec::parallel);
