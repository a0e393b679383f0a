#pragma once

#include <string>
#include <vector>

#include "rms/errors.hpp"
#include "rms/exec.hpp"
#include "rms/image.hpp"

namespace rms {

enum class Mode { IntegerLifting, OrthonormalFloat };
enum class Band { LL, LH, HL, HH };

// Levels are numbered 1 (finest) .. L (coarsest). Nested in-place layout: the LL
// band sits at the top-left (w>>L x h>>L); at each level the upper-right quadrant
// of the current region is HL, lower-left LH, lower-right HH.
struct WaveletPyramid {
    int width = 0;
    int height = 0;
    int levels = 0;
    Mode mode = Mode::IntegerLifting;
    std::vector<double> coeffs; // row-major

    double at(int i, int j) const { return coeffs[static_cast<size_t>(i) * width + j]; }
    double& at(int i, int j) { return coeffs[static_cast<size_t>(i) * width + j]; }
    int ll_width() const { return width >> levels; }
    int ll_height() const { return height >> levels; }
};

struct Subband {
    Band band;
    int level; // for LL this is the decomposition depth L
};

// Dimensions must be divisible by 2^(levels+1) so the LL band tiles into 2x2
// coding-tree root groups.
void check_pyramid_dims(int width, int height, int levels);

WaveletPyramid dwt2(const GrayImage& img, int levels, Mode mode, Exec ex = Exec::Parallel);
GrayImage idwt2(const WaveletPyramid& pyr, Exec ex = Exec::Parallel);

Subband subband_of(const WaveletPyramid& pyr, int i, int j);

// Debug dump: one row per line, space-separated coefficients.
std::string dump_matrix(const WaveletPyramid& pyr);

} // namespace rms
