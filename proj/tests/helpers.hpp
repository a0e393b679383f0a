#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rms/image.hpp"
#include "rms/wavelet.hpp"

namespace th {

inline rms::GrayImage const_image(int w, int h, double v) {
    rms::GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<size_t>(w) * h, v);
    return img;
}

inline rms::GrayImage random_image(int w, int h, uint32_t seed) {
    rms::GrayImage img = const_image(w, h, 0.0);
    std::mt19937 rng(seed);
    for (double& p : img.pixels)
        p = static_cast<double>(rng() % 256);
    return img;
}

// random integer coefficients in [-maxabs, maxabs]
inline rms::WaveletPyramid random_pyramid(int w, int h, int levels, uint32_t seed,
                                          rms::Mode mode = rms::Mode::IntegerLifting,
                                          int maxabs = 255) {
    rms::WaveletPyramid p;
    p.width = w;
    p.height = h;
    p.levels = levels;
    p.mode = mode;
    p.coeffs.resize(static_cast<size_t>(w) * h);
    std::mt19937 rng(seed);
    for (double& c : p.coeffs)
        c = static_cast<double>(static_cast<int>(rng() % (2 * maxabs + 1)) - maxabs);
    return p;
}

inline rms::WaveletPyramid zero_pyramid(int w, int h, int levels,
                                        rms::Mode mode = rms::Mode::IntegerLifting) {
    rms::WaveletPyramid p;
    p.width = w;
    p.height = h;
    p.levels = levels;
    p.mode = mode;
    p.coeffs.assign(static_cast<size_t>(w) * h, 0.0);
    return p;
}

} // namespace th
