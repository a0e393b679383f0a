#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rms/errors.hpp"

namespace rms {

// Pixels are kept as doubles so transforms stay exact; values are only rounded
// and clamped to [0,255] when an image is written out.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // row-major, top-left first

    double at(int i, int j) const { return pixels[static_cast<size_t>(i) * width + j]; }
    double& at(int i, int j) { return pixels[static_cast<size_t>(i) * width + j]; }
};

GrayImage parse_pgm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> serialize_pgm(const GrayImage& img);

GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

std::pair<GrayImage, GrayImage> crop_to_common(const GrayImage& a, const GrayImage& b);

} // namespace rms
