// Serial vs parallel timings for the data-parallel kernels.
#include <random>

#include <benchmark/benchmark.h>

#include "rms/fusion.hpp"
#include "rms/metrics.hpp"
#include "rms/wavelet.hpp"
#include "rms/weighting.hpp"

using namespace rms;

namespace {

GrayImage random_image(int w, int h, uint32_t seed) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<size_t>(w) * h);
    std::mt19937 rng(seed);
    for (double& p : img.pixels)
        p = static_cast<double>(rng() % 256);
    return img;
}

Exec exec_of(const benchmark::State& st) {
    return st.range(0) ? Exec::Parallel : Exec::Serial;
}

void args(benchmark::internal::Benchmark* b) {
    b->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
}

void BM_dwt2(benchmark::State& st) {
    GrayImage img = random_image(512, 512, 1);
    for (auto _ : st)
        benchmark::DoNotOptimize(dwt2(img, 4, Mode::OrthonormalFloat, exec_of(st)));
}
BENCHMARK(BM_dwt2)->Apply(args);

void BM_idwt2(benchmark::State& st) {
    WaveletPyramid pyr = dwt2(random_image(512, 512, 2), 4, Mode::OrthonormalFloat);
    for (auto _ : st)
        benchmark::DoNotOptimize(idwt2(pyr, exec_of(st)));
}
BENCHMARK(BM_idwt2)->Apply(args);

void BM_fuse_pca(benchmark::State& st) {
    GrayImage a = random_image(512, 512, 3);
    GrayImage b = random_image(512, 512, 4);
    for (auto _ : st)
        benchmark::DoNotOptimize(
            fuse(a, b, FusionRule::PCA, 4, Mode::OrthonormalFloat, exec_of(st)));
}
BENCHMARK(BM_fuse_pca)->Apply(args);

void BM_mse(benchmark::State& st) {
    GrayImage a = random_image(512, 512, 5);
    GrayImage b = random_image(512, 512, 6);
    for (auto _ : st)
        benchmark::DoNotOptimize(mse(a, b, exec_of(st)));
}
BENCHMARK(BM_mse)->Apply(args);

void BM_entropy(benchmark::State& st) {
    GrayImage a = random_image(512, 512, 7);
    for (auto _ : st)
        benchmark::DoNotOptimize(entropy(a.pixels, Binning::Pixel256, exec_of(st)));
}
BENCHMARK(BM_entropy)->Apply(args);

void BM_extract_features(benchmark::State& st) {
    WaveletPyramid pyr = dwt2(random_image(256, 256, 8), 3, Mode::IntegerLifting);
    for (auto _ : st)
        benchmark::DoNotOptimize(extract_features(pyr, exec_of(st)));
}
BENCHMARK(BM_extract_features)->Apply(args);

void BM_kmeans(benchmark::State& st) {
    WaveletPyramid pyr = dwt2(random_image(256, 256, 9), 3, Mode::IntegerLifting);
    std::vector<TreeFeature> feats = extract_features(pyr);
    for (auto _ : st)
        benchmark::DoNotOptimize(kmeans(feats, 6, 50, 0, exec_of(st)));
}
BENCHMARK(BM_kmeans)->Apply(args);

} // namespace

BENCHMARK_MAIN();
