#include "rms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <unordered_map>

namespace rms {

namespace {

// Blockwise sum shared by both exec paths so they are bit-identical.
template <class F>
double blocked_sum(size_t n, Exec ex, F&& term) {
    size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(nblocks, 0.0);
    auto block = [&](size_t b) {
        size_t lo = b * kReduceBlock;
        size_t hi = std::min(n, lo + kReduceBlock);
        double acc = 0;
        for (size_t t = lo; t < hi; ++t)
            acc += term(t);
        partial[b] = acc;
    };
    if (ex == Exec::Parallel) {
        long long nb = static_cast<long long>(nblocks);
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < nb; ++b)
            block(static_cast<size_t>(b));
    } else {
        for (size_t b = 0; b < nblocks; ++b)
            block(b);
    }
    double total = 0;
    for (double p : partial)
        total += p;
    return total;
}

} // namespace

double mse(const GrayImage& a, const GrayImage& b, Exec ex) {
    if (a.width != b.width || a.height != b.height)
        throw ShapeError("mse: size mismatch");
    size_t n = a.pixels.size();
    if (n == 0)
        throw ShapeError("mse: empty image");
    double sum = blocked_sum(n, ex, [&](size_t t) {
        double d = a.pixels[t] - b.pixels[t];
        return d * d;
    });
    return sum / static_cast<double>(n);
}

double psnr(const GrayImage& a, const GrayImage& b, Exec ex) {
    double m = mse(a, b, ex);
    if (m == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

double entropy(const std::vector<double>& values, Binning binning, Exec ex) {
    if (values.empty())
        throw ArgumentError("entropy: empty input");
    auto key_of = [&](double v) {
        long long k = std::llround(v);
        if (binning == Binning::Pixel256)
            k = std::clamp(k, 0ll, 255ll);
        return k;
    };

    size_t n = values.size();
    std::map<long long, size_t> counts;
    if (ex == Exec::Parallel) {
        size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
        std::vector<std::unordered_map<long long, size_t>> local(nblocks);
        long long nb = static_cast<long long>(nblocks);
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < nb; ++b) {
            size_t lo = static_cast<size_t>(b) * kReduceBlock;
            size_t hi = std::min(n, lo + kReduceBlock);
            for (size_t t = lo; t < hi; ++t)
                ++local[b][key_of(values[t])];
        }
        for (const auto& m : local)
            for (const auto& [k, c] : m)
                counts[k] += c;
    } else {
        for (double v : values)
            ++counts[key_of(v)];
    }

    // counts are exact integers, so summing in key order makes the result
    // independent of how the histogram was built
    double h = 0;
    double nn = static_cast<double>(n);
    for (const auto& [k, c] : counts) {
        double p = static_cast<double>(c) / nn;
        h -= p * std::log2(p);
    }
    return h;
}

double compression_ratio(const GrayImage& original, const SpihtBitstream& bs) {
    double orig_bytes = static_cast<double>(original.pixels.size());
    double stream_bytes = static_cast<double>(bs.serialize().size());
    return orig_bytes / stream_bytes;
}

std::string metrics_csv_header() {
    return "image,coder,budget_bits,psnr_db,mse,cr,entropy_bits";
}

std::string metrics_csv_row(const MetricsRow& row) {
    char num[256];
    std::string out = row.image + "," + row.coder + ",";
    std::snprintf(num, sizeof num, "%llu", static_cast<unsigned long long>(row.budget_bits));
    out += num;
    if (std::isinf(row.psnr_db))
        out += ",inf";
    else {
        std::snprintf(num, sizeof num, ",%.6f", row.psnr_db);
        out += num;
    }
    std::snprintf(num, sizeof num, ",%.6f,%.6f,%.6f", row.mse, row.cr, row.entropy_bits);
    out += num;
    return out;
}

} // namespace rms
