#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mspec/svm.hpp"

namespace {

struct Problem {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

Problem gaussian_problem(int per_class, int dim, double separation) {
    Problem p;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> row(static_cast<size_t>(dim));
            for (auto& v : row) v = g(rng);
            row[0] += c == 0 ? 0.0 : separation;
            p.x.push_back(std::move(row));
            p.y.push_back(c == 0 ? -1 : 1);
        }
    }
    return p;
}

}  // namespace

static void SmoTrain(benchmark::State& state) {
    const Problem p =
        gaussian_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 2.0);
    for (auto _ : state) {
        auto model = mspec::clf::svm_train(p.x, p.y, 10.0, 0.05);
        benchmark::DoNotOptimize(model.bias);
    }
}
BENCHMARK(SmoTrain)->Args({50, 64})->Args({100, 384})->Args({150, 384});

static void SvmScore(benchmark::State& state) {
    const Problem p = gaussian_problem(100, 384, 2.0);
    const auto model = mspec::clf::svm_train(p.x, p.y, 10.0, 0.05);
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mspec::clf::svm_score(model, p.x[i]));
        i = (i + 1) % p.x.size();
    }
}
BENCHMARK(SvmScore);
