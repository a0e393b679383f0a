#include "rms/wavelet.hpp"

#include <cmath>
#include <cstdio>

namespace rms {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One 1D Haar step over x[0..n) taken with the given stride; smooth half first.
// IntegerLifting is the S-transform s = floor((a+b)/2), d = a-b; the floor (not
// C++ truncation) matters for negative values.
void fwd_1d(double* x, int n, int stride, Mode mode, double* tmp) {
    int half = n / 2;
    for (int k = 0; k < half; ++k) {
        double a = x[static_cast<size_t>(2 * k) * stride];
        double b = x[static_cast<size_t>(2 * k + 1) * stride];
        if (mode == Mode::IntegerLifting) {
            tmp[k] = std::floor((a + b) / 2.0);
            tmp[half + k] = a - b;
        } else {
            tmp[k] = (a + b) * kInvSqrt2;
            tmp[half + k] = (a - b) * kInvSqrt2;
        }
    }
    for (int k = 0; k < n; ++k)
        x[static_cast<size_t>(k) * stride] = tmp[k];
}

void inv_1d(double* x, int n, int stride, Mode mode, double* tmp) {
    int half = n / 2;
    for (int k = 0; k < half; ++k) {
        double s = x[static_cast<size_t>(k) * stride];
        double d = x[static_cast<size_t>(half + k) * stride];
        if (mode == Mode::IntegerLifting) {
            double a = s + std::floor((d + 1.0) / 2.0);
            tmp[2 * k] = a;
            tmp[2 * k + 1] = a - d;
        } else {
            tmp[2 * k] = (s + d) * kInvSqrt2;
            tmp[2 * k + 1] = (s - d) * kInvSqrt2;
        }
    }
    for (int k = 0; k < n; ++k)
        x[static_cast<size_t>(k) * stride] = tmp[k];
}

void level_forward(WaveletPyramid& pyr, int cur_w, int cur_h, Exec ex) {
    double* base = pyr.coeffs.data();
    int stride = pyr.width;
    auto do_row = [&](int r) {
        std::vector<double> tmp(cur_w);
        fwd_1d(base + static_cast<size_t>(r) * stride, cur_w, 1, pyr.mode, tmp.data());
    };
    auto do_col = [&](int c) {
        std::vector<double> tmp(cur_h);
        fwd_1d(base + c, cur_h, stride, pyr.mode, tmp.data());
    };
    if (ex == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int r = 0; r < cur_h; ++r)
            do_row(r);
#pragma omp parallel for schedule(static)
        for (int c = 0; c < cur_w; ++c)
            do_col(c);
    } else {
        for (int r = 0; r < cur_h; ++r)
            do_row(r);
        for (int c = 0; c < cur_w; ++c)
            do_col(c);
    }
}

void level_inverse(WaveletPyramid& pyr, int cur_w, int cur_h, Exec ex) {
    double* base = pyr.coeffs.data();
    int stride = pyr.width;
    auto do_col = [&](int c) {
        std::vector<double> tmp(cur_h);
        inv_1d(base + c, cur_h, stride, pyr.mode, tmp.data());
    };
    auto do_row = [&](int r) {
        std::vector<double> tmp(cur_w);
        inv_1d(base + static_cast<size_t>(r) * stride, cur_w, 1, pyr.mode, tmp.data());
    };
    if (ex == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < cur_w; ++c)
            do_col(c);
#pragma omp parallel for schedule(static)
        for (int r = 0; r < cur_h; ++r)
            do_row(r);
    } else {
        for (int c = 0; c < cur_w; ++c)
            do_col(c);
        for (int r = 0; r < cur_h; ++r)
            do_row(r);
    }
}

} // namespace

void check_pyramid_dims(int width, int height, int levels) {
    if (levels < 1)
        throw ArgumentError("levels must be >= 1");
    if (width <= 0 || height <= 0)
        throw ShapeError("empty image");
    int div = 1 << (levels + 1);
    if (width % div != 0 || height % div != 0)
        throw ShapeError("dimensions must be divisible by 2^(levels+1)");
}

WaveletPyramid dwt2(const GrayImage& img, int levels, Mode mode, Exec ex) {
    check_pyramid_dims(img.width, img.height, levels);
    WaveletPyramid pyr;
    pyr.width = img.width;
    pyr.height = img.height;
    pyr.levels = levels;
    pyr.mode = mode;
    pyr.coeffs = img.pixels;
    for (int l = 1; l <= levels; ++l)
        level_forward(pyr, img.width >> (l - 1), img.height >> (l - 1), ex);
    return pyr;
}

GrayImage idwt2(const WaveletPyramid& pyr, Exec ex) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    if (pyr.coeffs.size() != static_cast<size_t>(pyr.width) * pyr.height)
        throw ShapeError("coefficient buffer does not match dimensions");
    WaveletPyramid work = pyr;
    for (int l = pyr.levels; l >= 1; --l)
        level_inverse(work, pyr.width >> (l - 1), pyr.height >> (l - 1), ex);
    GrayImage img;
    img.width = pyr.width;
    img.height = pyr.height;
    img.pixels = std::move(work.coeffs);
    return img;
}

Subband subband_of(const WaveletPyramid& pyr, int i, int j) {
    if (i < 0 || j < 0 || i >= pyr.height || j >= pyr.width)
        throw IndexError("coordinate out of range");
    for (int l = 1; l <= pyr.levels; ++l) {
        int hw = pyr.width >> l;
        int hh = pyr.height >> l;
        bool right = j >= hw;
        bool down = i >= hh;
        if (right || down) {
            Band b = right ? (down ? Band::HH : Band::HL) : Band::LH;
            return {b, l};
        }
    }
    return {Band::LL, pyr.levels};
}

std::string dump_matrix(const WaveletPyramid& pyr) {
    std::string out;
    char buf[40];
    for (int i = 0; i < pyr.height; ++i) {
        for (int j = 0; j < pyr.width; ++j) {
            std::snprintf(buf, sizeof buf, "%g", pyr.at(i, j));
            if (j)
                out += ' ';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace rms
