#include "rms/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rms {

namespace {

bool is_space(uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Reads one whitespace-delimited unsigned decimal token.
long read_token(const std::vector<uint8_t>& b, size_t& pos) {
    while (pos < b.size() && is_space(b[pos]))
        ++pos;
    if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
        throw ParseError("malformed PGM header");
    long v = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        v = v * 10 + (b[pos] - '0');
        if (v > 1'000'000'000)
            throw ParseError("PGM header value out of range");
        ++pos;
    }
    return v;
}

} // namespace

GrayImage parse_pgm(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw ParseError("not a PNM file");
    char kind = static_cast<char>(bytes[1]);
    if (kind < '1' || kind > '6')
        throw ParseError("not a PNM file");
    if (kind != '5')
        throw UnsupportedFormat("only binary PGM (P5) is supported");

    size_t pos = 2;
    long w = read_token(bytes, pos);
    long h = read_token(bytes, pos);
    long maxval = read_token(bytes, pos);
    if (w <= 0 || h <= 0 || maxval <= 0)
        throw ParseError("malformed PGM header");
    if (maxval > 255)
        throw UnsupportedFormat("PGM maxval > 255 is not supported");
    if (pos >= bytes.size() || !is_space(bytes[pos]))
        throw ParseError("malformed PGM header");
    ++pos; // exactly one whitespace byte before the payload

    size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (bytes.size() - pos < n)
        throw ParseError("truncated PGM payload");
    if (bytes.size() - pos > n)
        throw ParseError("trailing bytes after PGM payload");

    GrayImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(n);
    for (size_t k = 0; k < n; ++k)
        img.pixels[k] = static_cast<double>(bytes[pos + k]);
    return img;
}

std::vector<uint8_t> serialize_pgm(const GrayImage& img) {
    char header[48];
    int hn = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", img.width, img.height);
    std::vector<uint8_t> out(header, header + hn);
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
        long long r = std::llround(v);
        if (r < 0) r = 0;
        if (r > 255) r = 255;
        out.push_back(static_cast<uint8_t>(r));
    }
    return out;
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return parse_pgm(bytes);
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::vector<uint8_t> bytes = serialize_pgm(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw IoError("write failed on " + path);
}

std::pair<GrayImage, GrayImage> crop_to_common(const GrayImage& a, const GrayImage& b) {
    if (a.width <= 0 || a.height <= 0 || b.width <= 0 || b.height <= 0)
        throw ShapeError("crop_to_common: empty input");
    int w = std::min(a.width, b.width);
    int h = std::min(a.height, b.height);

    auto crop = [&](const GrayImage& src) {
        GrayImage out;
        out.width = w;
        out.height = h;
        out.pixels.resize(static_cast<size_t>(w) * h);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                out.at(i, j) = src.at(i, j);
        return out;
    };
    return {crop(a), crop(b)};
}

} // namespace rms
