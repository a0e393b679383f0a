#include "rms/fusion.hpp"

#include <cmath>

namespace rms {

PcaWeights pca_weights(const GrayImage& img1, const GrayImage& img2) {
    if (img1.width != img2.width || img1.height != img2.height)
        throw ShapeError("pca_weights: size mismatch");
    size_t n = img1.pixels.size();
    if (n < 2)
        throw ArgumentError("pca_weights: need at least 2 pixels");

    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (size_t t = 0; t < n; ++t) {
        double x = img1.pixels[t], y = img2.pixels[t];
        sx += x; sy += y;
        sxx += x * x; syy += y * y; sxy += x * y;
    }
    double nn = static_cast<double>(n);
    double c11 = (sxx - sx * sx / nn) / nn;
    double c22 = (syy - sy * sy / nn) / nn;
    double c12 = (sxy - sx * sy / nn) / nn;

    if (c11 == 0.0 && c22 == 0.0 && c12 == 0.0)
        return {0.5, 0.5, true};

    double scale = std::max({std::fabs(c11), std::fabs(c22), std::fabs(c12)});
    if (std::fabs(c12) <= 1e-14 * scale) {
        // diagonal covariance: the larger variance wins outright
        if (c11 > c22) return {1.0, 0.0, false};
        if (c22 > c11) return {0.0, 1.0, false};
        return {0.5, 0.5, false};
    }

    double lambda = 0.5 * ((c11 + c22) + std::sqrt((c11 - c22) * (c11 - c22) + 4.0 * c12 * c12));
    double v1 = c12, v2 = lambda - c11; // eigenvector for the larger eigenvalue
    double sum = v1 + v2;
    if (std::fabs(sum) <= 1e-9 * (std::fabs(v1) + std::fabs(v2)))
        return {0.5, 0.5, true}; // anti-correlated inputs: components cancel
    return {v1 / sum, v2 / sum, false};
}

GrayImage fuse(const GrayImage& img1, const GrayImage& img2, FusionRule rule,
               int levels, Mode mode, Exec ex) {
    if (img1.width != img2.width || img1.height != img2.height)
        throw ShapeError("fuse: size mismatch");

    PcaWeights pw;
    if (rule == FusionRule::PCA)
        pw = pca_weights(img1, img2);

    WaveletPyramid p1 = dwt2(img1, levels, mode, ex);
    WaveletPyramid p2 = dwt2(img2, levels, mode, ex);

    size_t n = p1.coeffs.size();
    auto combine = [&](size_t t) {
        double c1 = p1.coeffs[t], c2 = p2.coeffs[t];
        switch (rule) {
        case FusionRule::Averaging: return combine_avg(c1, c2);
        case FusionRule::Maximum: return std::fabs(c1) >= std::fabs(c2) ? c1 : c2;
        case FusionRule::Minimum: return std::fabs(c1) <= std::fabs(c2) ? c1 : c2;
        case FusionRule::PCA: return pw.a1 * c1 + pw.a2 * c2;
        }
        return 0.0; // unreachable
    };

    WaveletPyramid fused = p1;
    if (ex == Exec::Parallel) {
        long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
        for (long long t = 0; t < nn; ++t)
            fused.coeffs[t] = combine(static_cast<size_t>(t));
    } else {
        for (size_t t = 0; t < n; ++t)
            fused.coeffs[t] = combine(t);
    }
    return idwt2(fused, ex);
}

} // namespace rms
