// The parallel paths use fixed blockwise reductions so they must match the
// serial ones bit for bit, not just approximately.
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "rms/fusion.hpp"
#include "rms/metrics.hpp"
#include "rms/wavelet.hpp"
#include "rms/weighting.hpp"

using namespace rms;

TEST_CASE("transform kernels: serial and parallel agree exactly") {
    for (Mode mode : {Mode::IntegerLifting, Mode::OrthonormalFloat}) {
        GrayImage img = th::random_image(64, 64, 11);
        WaveletPyramid ps = dwt2(img, 3, mode, Exec::Serial);
        WaveletPyramid pp = dwt2(img, 3, mode, Exec::Parallel);
        CHECK(ps.coeffs == pp.coeffs);

        GrayImage rs = idwt2(ps, Exec::Serial);
        GrayImage rp = idwt2(ps, Exec::Parallel);
        CHECK(rs.pixels == rp.pixels);
    }
}

TEST_CASE("fusion: serial and parallel agree exactly") {
    GrayImage a = th::random_image(64, 64, 21);
    GrayImage b = th::random_image(64, 64, 22);
    for (FusionRule rule :
         {FusionRule::Averaging, FusionRule::Maximum, FusionRule::Minimum, FusionRule::PCA}) {
        GrayImage fs = fuse(a, b, rule, 3, Mode::OrthonormalFloat, Exec::Serial);
        GrayImage fp = fuse(a, b, rule, 3, Mode::OrthonormalFloat, Exec::Parallel);
        CHECK(fs.pixels == fp.pixels);
    }
}

TEST_CASE("metrics: serial and parallel agree exactly") {
    GrayImage a = th::random_image(128, 64, 31);
    GrayImage b = th::random_image(128, 64, 32);
    CHECK(mse(a, b, Exec::Serial) == mse(a, b, Exec::Parallel));
    CHECK(psnr(a, b, Exec::Serial) == psnr(a, b, Exec::Parallel));
    CHECK(entropy(a.pixels, Binning::Pixel256, Exec::Serial) ==
          entropy(a.pixels, Binning::Pixel256, Exec::Parallel));
    CHECK(entropy(a.pixels, Binning::Integer, Exec::Serial) ==
          entropy(a.pixels, Binning::Integer, Exec::Parallel));
}

TEST_CASE("tree features and clustering: serial and parallel agree exactly") {
    WaveletPyramid p = th::random_pyramid(64, 64, 3, 41);
    auto fs = extract_features(p, Exec::Serial);
    auto fp = extract_features(p, Exec::Parallel);
    REQUIRE(fs.size() == fp.size());
    for (size_t t = 0; t < fs.size(); ++t)
        CHECK(fs[t].vec == fp[t].vec);

    KmeansResult ks = kmeans(fs, 4, 50, 9, Exec::Serial);
    KmeansResult kp = kmeans(fs, 4, 50, 9, Exec::Parallel);
    CHECK(ks.assignments == kp.assignments);
    CHECK(ks.centroids == kp.centroids);
    CHECK(ks.objective == kp.objective);
}
