#include <benchmark/benchmark.h>

#include <random>

#include "mspec/cae.hpp"
#include "mspec/linalg.hpp"
#include "mspec/nn.hpp"

namespace {

using namespace mspec;

cae::CAEConfig bench_config(int branches) {
    cae::CAEConfig config;
    config.branch_specs = {repr::RepresentationSpec::wideband()};
    if (branches >= 2) config.branch_specs.push_back(repr::RepresentationSpec::narrowband());
    return config;
}

nn::TensorMap bench_inputs(const cae::CAEConfig& config, int batch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    nn::TensorMap inputs;
    for (const auto& spec : config.branch_specs) {
        nn::Tensor t({batch, 1, repr::kImageRows, repr::kImageCols});
        for (double& v : t.data) v = u(rng);
        inputs[cae::branch_input_name(spec)] = std::move(t);
    }
    return inputs;
}

}  // namespace

static void Matmul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(static_cast<size_t>(n) * n), b(a.size()), c(a.size());
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    for (auto _ : state) {
        linalg::matmul(a.data(), b.data(), c.data(), n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(Matmul)->Arg(128)->Arg(256)->Arg(512);

static void CaeForward(benchmark::State& state) {
    const int branches = static_cast<int>(state.range(0));
    const int batch = static_cast<int>(state.range(1));
    const cae::CAEConfig config = bench_config(branches);
    nn::ModelGraph graph = cae::build_cae(config);
    nn::init_parameters(graph, 3);
    std::mt19937_64 rng(5);
    const nn::TensorMap inputs = bench_inputs(config, batch, rng);
    for (auto _ : state) {
        auto acts = nn::forward(graph, inputs);
        benchmark::DoNotOptimize(acts.at(graph.bottleneck_name).data.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(CaeForward)->Args({1, 8})->Args({2, 8});

static void CaeTrainStep(benchmark::State& state) {
    const int branches = static_cast<int>(state.range(0));
    const int batch = static_cast<int>(state.range(1));
    const cae::CAEConfig config = bench_config(branches);
    nn::ModelGraph graph = cae::build_cae(config);
    nn::init_parameters(graph, 3);
    nn::AdamState adam = nn::AdamState::init(graph, 1e-3);
    std::mt19937_64 rng(5);
    const nn::TensorMap inputs = bench_inputs(config, batch, rng);

    for (auto _ : state) {
        nn::TensorMap acts = nn::forward(graph, inputs);
        nn::TensorMap loss_grads;
        for (const auto& spec : config.branch_specs) {
            auto [loss, grad] = nn::mse_loss(acts.at(cae::branch_recon_name(spec)),
                                             inputs.at(cae::branch_input_name(spec)));
            benchmark::DoNotOptimize(loss);
            loss_grads[cae::branch_recon_name(spec)] = std::move(grad);
        }
        nn::GraphGradients grads = nn::backward(graph, acts, loss_grads);
        nn::adam_step(adam, graph, grads);
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(CaeTrainStep)->Args({1, 8})->Args({2, 8});
