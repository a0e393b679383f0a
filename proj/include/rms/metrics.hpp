#pragma once

#include <string>
#include <vector>

#include "rms/exec.hpp"
#include "rms/image.hpp"
#include "rms/spiht.hpp"

namespace rms {

double mse(const GrayImage& a, const GrayImage& b, Exec ex = Exec::Parallel);

// 10*log10(255^2 / mse); +infinity when the images are identical.
double psnr(const GrayImage& a, const GrayImage& b, Exec ex = Exec::Parallel);

enum class Binning {
    Integer, // symbols are values rounded to nearest integer
    Pixel256 // rounded and clamped to [0,255]
};

double entropy(const std::vector<double>& values, Binning binning, Exec ex = Exec::Parallel);

// original bytes / total stream bytes (header and mask included)
double compression_ratio(const GrayImage& original, const SpihtBitstream& bs);

struct MetricsRow {
    std::string image;
    std::string coder;
    uint64_t budget_bits = 0;
    double psnr_db = 0;
    double mse = 0;
    double cr = 0;
    double entropy_bits = 0;
};

std::string metrics_csv_header(); // image,coder,budget_bits,psnr_db,mse,cr,entropy_bits
std::string metrics_csv_row(const MetricsRow& row);

} // namespace rms
