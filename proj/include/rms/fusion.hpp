#pragma once

#include "rms/exec.hpp"
#include "rms/image.hpp"
#include "rms/wavelet.hpp"

namespace rms {

enum class FusionRule { Averaging, Maximum, Minimum, PCA };

struct PcaWeights {
    double a1 = 0.5;
    double a2 = 0.5;
    bool degenerate = false; // zero-variance fallback was taken
};

inline double combine_avg(double c1, double c2) { return (c1 + c2) / 2.0; }

// Whole-image pixel covariance; weights are the principal eigenvector of the
// 2x2 matrix normalized to sum 1.
PcaWeights pca_weights(const GrayImage& img1, const GrayImage& img2);

// Transform both images, combine coefficient-wise, invert. Magnitude rules
// (Maximum/Minimum) compare absolute values and keep the winning coefficient's
// sign; ties keep the first input's coefficient.
GrayImage fuse(const GrayImage& img1, const GrayImage& img2, FusionRule rule,
               int levels, Mode mode, Exec ex = Exec::Parallel);

} // namespace rms
