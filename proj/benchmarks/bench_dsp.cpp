#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mspec/dsp.hpp"
#include "mspec/representations.hpp"

namespace {

mspec::audio::Segment test_segment() {
    mspec::audio::Segment seg;
    seg.samples.resize(8000);
    for (size_t n = 0; n < seg.samples.size(); ++n) {
        const double t = static_cast<double>(n) / 16000.0;
        seg.samples[n] = 0.4 * std::sin(2.0 * std::numbers::pi * 180.0 * t) +
                         0.2 * std::sin(2.0 * std::numbers::pi * 1200.0 * t);
    }
    return seg;
}

}  // namespace

static void NarrowbandSpectrogram(benchmark::State& state) {
    const auto seg = test_segment();
    const auto spec = mspec::repr::RepresentationSpec::narrowband();
    for (auto _ : state) {
        auto image = mspec::repr::mel_spectrogram(seg, spec);
        benchmark::DoNotOptimize(image.values.data());
    }
}
BENCHMARK(NarrowbandSpectrogram);

static void WidebandSpectrogram(benchmark::State& state) {
    const auto seg = test_segment();
    const auto spec = mspec::repr::RepresentationSpec::wideband();
    for (auto _ : state) {
        auto image = mspec::repr::mel_spectrogram(seg, spec);
        benchmark::DoNotOptimize(image.values.data());
    }
}
BENCHMARK(WidebandSpectrogram);

static void WaveletScalogram(benchmark::State& state) {
    const auto seg = test_segment();
    const auto spec = mspec::repr::RepresentationSpec::wavelet();
    for (auto _ : state) {
        auto image = mspec::repr::wavelet_scalogram(seg, spec);
        benchmark::DoNotOptimize(image.values.data());
    }
}
BENCHMARK(WaveletScalogram);

static void BicubicResize(benchmark::State& state) {
    mspec::Matrix m(128, static_cast<int>(state.range(0)));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = std::sin(0.1 * r) * std::cos(0.2 * c);
    for (auto _ : state) {
        auto out = mspec::dsp::bicubic_resize(m, 128, 126);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BicubicResize)->Arg(48)->Arg(166)->Arg(512);

static void Resample8kTo16k(benchmark::State& state) {
    std::vector<double> x(static_cast<size_t>(state.range(0)));
    for (size_t n = 0; n < x.size(); ++n)
        x[n] = std::sin(2.0 * std::numbers::pi * 440.0 * n / 8000.0);
    for (auto _ : state) {
        auto y = mspec::dsp::resample(x, 8000, 16000);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(Resample8kTo16k)->Arg(8000)->Arg(32000);
