#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "reference_spiht.hpp"
#include "rms/errors.hpp"
#include "rms/spiht.hpp"

using namespace rms;

namespace {

std::vector<int> payload_bits(const SpihtBitstream& bs) {
    std::vector<int> out;
    out.reserve(bs.payload_bit_count);
    for (uint32_t t = 0; t < bs.payload_bit_count; ++t)
        out.push_back((bs.payload[t >> 3] >> (7 - (t & 7))) & 1);
    return out;
}

refspiht::Mat mat_of(const WaveletPyramid& p) {
    refspiht::Mat m;
    m.w = p.width;
    m.h = p.height;
    m.L = p.levels;
    m.v.resize(p.coeffs.size());
    for (size_t t = 0; t < p.coeffs.size(); ++t)
        m.v[t] = std::llround(p.coeffs[t]);
    return m;
}

bool same_snapshot(const ListSnapshot& a, const ListSnapshot& b) {
    return a.lip == b.lip && a.lis == b.lis && a.lsp == b.lsp;
}

} // namespace

TEST_CASE("max bitplane") {
    WaveletPyramid p = th::zero_pyramid(16, 16, 2);
    p.at(3, 7) = 9;
    CHECK(max_bitplane(p).P == 3);
    CHECK_FALSE(max_bitplane(p).all_zero);
    p.at(3, 7) = 8;
    CHECK(max_bitplane(p).P == 3);
    p.at(3, 7) = 7;
    CHECK(max_bitplane(p).P == 2);
    p.at(3, 7) = -7;
    CHECK(max_bitplane(p).P == 2);
    p.at(3, 7) = 1;
    CHECK(max_bitplane(p).P == 0);
    p.at(3, 7) = 3.9; // fractional magnitudes floor through log2
    CHECK(max_bitplane(p).P == 1);
    p.at(3, 7) = 0;
    CHECK(max_bitplane(p).all_zero);
    CHECK(max_bitplane(p).P == 0);
}

TEST_CASE("threshold powers and range errors") {
    CHECK(threshold(3, 0) == 8);
    CHECK(threshold(3, 1) == 4);
    CHECK(threshold(3, 3) == 1);
    CHECK(threshold(0, 0) == 1);
    CHECK(threshold(62, 0) == (int64_t{1} << 62));
    CHECK_THROWS_AS(threshold(3, 4), RangeError);
    CHECK_THROWS_AS(threshold(3, -1), RangeError);
    CHECK_THROWS_AS(threshold(-1, 0), RangeError);
    CHECK_THROWS_AS(threshold(63, 0), RangeError);
}

TEST_CASE("offspring convention") {
    WaveletPyramid p2 = th::zero_pyramid(16, 16, 2);
    CHECK(offspring({0, 0}, p2).empty());
    CHECK(offspring({2, 2}, p2).empty());
    CHECK(offspring({1, 1}, p2) ==
          std::vector<Coord>{{4, 4}, {4, 5}, {5, 4}, {5, 5}});
    CHECK(offspring({2, 3}, p2) ==
          std::vector<Coord>{{2, 6}, {2, 7}, {3, 6}, {3, 7}});
    CHECK(offspring({2, 6}, p2) ==
          std::vector<Coord>{{4, 12}, {4, 13}, {5, 12}, {5, 13}});
    CHECK(offspring({8, 3}, p2).empty());  // finest level
    CHECK(offspring({3, 12}, p2).empty()); // finest level
    CHECK_THROWS_AS(offspring({-1, 0}, p2), IndexError);
    CHECK_THROWS_AS(offspring({0, 16}, p2), IndexError);
    CHECK_THROWS_AS(offspring({16, 0}, p2), IndexError);

    WaveletPyramid p3 = th::zero_pyramid(16, 16, 3);
    CHECK(offspring({2, 2}, p3) ==
          std::vector<Coord>{{4, 4}, {4, 5}, {5, 4}, {5, 5}});
    CHECK(offspring({0, 1}, p3) ==
          std::vector<Coord>{{0, 2}, {0, 3}, {1, 2}, {1, 3}});
}

TEST_CASE("trees partition the detail coefficients") {
    WaveletPyramid p = th::zero_pyramid(16, 16, 2);
    std::map<std::pair<int, int>, int> seen;
    std::vector<Coord> stack;
    for (int i = 0; i < p.ll_height(); ++i)
        for (int j = 0; j < p.ll_width(); ++j)
            stack.push_back({i, j});
    size_t roots = stack.size();
    while (!stack.empty()) {
        Coord c = stack.back();
        stack.pop_back();
        for (Coord o : offspring(c, p)) {
            ++seen[{o.i, o.j}];
            stack.push_back(o);
        }
    }
    CHECK(roots == 16);
    // every detail coordinate is reached exactly once, LL never
    size_t detail = 0;
    for (const auto& [c, cnt] : seen) {
        CHECK(cnt == 1);
        CHECK((c.first >= 4 || c.second >= 4));
        ++detail;
    }
    CHECK(detail == 16u * 16 - 16);
}

TEST_CASE("single coefficient traces to the known bit pattern") {
    WaveletPyramid p = th::zero_pyramid(4, 4, 1);
    p.at(0, 0) = 5;
    SpihtBitstream bs = encode(p, kUnbounded, true);
    CHECK(bs.P == 2);
    CHECK(bs.width == 4);
    CHECK(bs.height == 4);
    CHECK(bs.levels == 1);
    CHECK(bs.q_num == 1);
    CHECK(bs.q_den == 1);
    CHECK_FALSE(bs.float_mode);
    CHECK_FALSE(bs.remspiht);
    CHECK_FALSE(bs.has_mask);
    CHECK_FALSE(bs.all_zero);
    CHECK(bs.payload_bit_count == 22);
    CHECK(bs.payload == std::vector<uint8_t>{0x80, 0x00, 0x04});
    CHECK(bs.pass_bits == std::vector<uint64_t>{8, 15, 22});
    CHECK(bs.counters.significance == 19);
    CHECK(bs.counters.sign == 1);
    CHECK(bs.counters.refinement == 2);
    CHECK(bs.counters.total() == bs.payload_bit_count);
    CHECK(bs.header_bits() == 160);
    CHECK(bs.total_bits() == 182);

    WaveletPyramid back = decode(bs);
    CHECK(back.coeffs == p.coeffs);

    p.at(0, 0) = -5;
    SpihtBitstream neg = encode(p);
    CHECK(neg.payload == std::vector<uint8_t>{0xc0, 0x00, 0x04});
    CHECK(decode(neg).coeffs == p.coeffs);
}

TEST_CASE("payload matches the brute-force reference coder") {
    int cases = 0;
    for (uint32_t seed = 0; seed < 10; ++seed) {
        WaveletPyramid p = th::random_pyramid(8, 8, 2, 500 + seed);
        SpihtBitstream bs = encode(p);
        std::vector<int> ref = refspiht::encode(mat_of(p));
        CHECK(payload_bits(bs) == ref);
        ++cases;
    }
    for (uint32_t seed = 0; seed < 5; ++seed) {
        WaveletPyramid p = th::random_pyramid(16, 16, 2, 600 + seed, Mode::IntegerLifting, 800);
        SpihtBitstream bs = encode(p);
        CHECK(payload_bits(bs) == refspiht::encode(mat_of(p)));
        ++cases;
    }
    for (uint32_t seed = 0; seed < 3; ++seed) {
        WaveletPyramid p = th::random_pyramid(16, 16, 3, 700 + seed);
        SpihtBitstream bs = encode(p);
        CHECK(payload_bits(bs) == refspiht::encode(mat_of(p)));
        ++cases;
    }
    CHECK(cases == 18);
}

TEST_CASE("random pyramids round trip exactly") {
    for (uint32_t seed = 0; seed < 100; ++seed) {
        WaveletPyramid p = th::random_pyramid(16, 16, 2, 900 + seed);
        CHECK(decode(encode(p)).coeffs == p.coeffs);
    }
}

TEST_CASE("float mode quantizes to 1/64 steps") {
    WaveletPyramid p = th::zero_pyramid(8, 8, 1, Mode::OrthonormalFloat);
    std::mt19937 rng(4242);
    for (double& c : p.coeffs)
        c = static_cast<double>(static_cast<int>(rng() % 32768) - 16384) / 64.0;
    SpihtBitstream bs = encode(p);
    CHECK(bs.float_mode);
    CHECK(bs.q_num == 1);
    CHECK(bs.q_den == 64);
    WaveletPyramid back = decode(bs);
    CHECK(back.mode == Mode::OrthonormalFloat);
    CHECK(back.coeffs == p.coeffs); // dyadic values survive exactly

    // non-dyadic values land within half a quantization step
    WaveletPyramid q = th::zero_pyramid(8, 8, 1, Mode::OrthonormalFloat);
    q.at(1, 1) = 0.7071067811865476;
    WaveletPyramid qb = decode(encode(q));
    CHECK(std::fabs(qb.at(1, 1) - q.at(1, 1)) <= 0.5 / 64.0 + 1e-12);
}

TEST_CASE("all-zero pyramids take the short path") {
    WaveletPyramid p = th::zero_pyramid(16, 16, 2);
    SpihtBitstream bs = encode(p);
    CHECK(bs.all_zero);
    CHECK(bs.payload.empty());
    CHECK(bs.payload_bit_count == 0);
    CHECK(bs.serialize().size() == 20);
    CHECK(decode(bs).coeffs == p.coeffs);
    SpihtBitstream back = SpihtBitstream::parse(bs.serialize());
    CHECK(back.all_zero);
    CHECK(decode(back).coeffs == p.coeffs);
}

TEST_CASE("budgeted payloads are prefixes of the unbounded payload") {
    WaveletPyramid p = th::random_pyramid(16, 16, 2, 77);
    SpihtBitstream full = encode(p);
    std::vector<int> full_bits = payload_bits(full);
    uint64_t hdr = full.header_bits();
    for (uint64_t budget : {hdr, hdr + 1, hdr + 7, hdr + 64, hdr + 321,
                            full.total_bits() - 1, full.total_bits()}) {
        SpihtBitstream tr = encode(p, budget);
        CHECK(tr.payload_bit_count == std::min<uint64_t>(budget - hdr, full_bits.size()));
        std::vector<int> tb = payload_bits(tr);
        CHECK(std::equal(tb.begin(), tb.end(), full_bits.begin()));
        // truncated encode and prefix-limited decode agree
        WaveletPyramid a = decode(tr);
        WaveletPyramid b = decode(full, budget - hdr);
        CHECK(a.coeffs == b.coeffs);
    }
}

TEST_CASE("reconstruction error is bounded by the pass threshold") {
    WaveletPyramid p = th::random_pyramid(16, 16, 2, 88);
    SpihtBitstream bs = encode(p);
    for (size_t k = 0; k < bs.pass_bits.size(); ++k) {
        WaveletPyramid r = decode(bs, bs.pass_bits[k]);
        double bound = static_cast<double>(threshold(bs.P, static_cast<int>(k)));
        for (size_t t = 0; t < p.coeffs.size(); ++t)
            CHECK(std::fabs(p.coeffs[t] - r.coeffs[t]) < bound + 1e-12);
    }
    WaveletPyramid last = decode(bs, bs.pass_bits.back());
    CHECK(last.coeffs == p.coeffs);
}

TEST_CASE("budgets below the header are rejected") {
    WaveletPyramid p = th::random_pyramid(16, 16, 2, 99);
    CHECK_THROWS_AS(encode(p, 0), BudgetTooSmall);
    CHECK_THROWS_AS(encode(p, 159), BudgetTooSmall);
    SpihtBitstream bs = encode(p, 160);
    CHECK(bs.payload_bit_count == 0);
    WaveletPyramid r = decode(bs);
    for (double c : r.coeffs)
        CHECK(c == 0.0);
}

TEST_CASE("a truncation between significance and sign leaves the decoder clean") {
    WaveletPyramid p = th::zero_pyramid(4, 4, 1);
    p.at(0, 0) = 5;
    SpihtBitstream tr = encode(p, 161); // room for exactly one payload bit
    CHECK(tr.payload_bit_count == 1);
    CHECK(payload_bits(tr) == std::vector<int>{1});
    WaveletPyramid r = decode(tr);
    for (double c : r.coeffs)
        CHECK(c == 0.0);
}

TEST_CASE("encoder and decoder lists stay synchronized") {
    WaveletPyramid p = th::random_pyramid(16, 16, 2, 123);
    SpihtBitstream bs = encode(p, kUnbounded, true);
    std::vector<ListSnapshot> dec_trace;
    decode(bs, {}, &dec_trace);
    REQUIRE(bs.trace.size() == dec_trace.size());
    for (size_t k = 0; k < dec_trace.size(); ++k)
        CHECK(same_snapshot(bs.trace[k], dec_trace[k]));

    SpihtBitstream cut = encode(p, bs.header_bits() + 200, true);
    std::vector<ListSnapshot> cut_trace;
    decode(cut, {}, &cut_trace);
    REQUIRE(cut.trace.size() == cut_trace.size());
    for (size_t k = 0; k < cut_trace.size(); ++k)
        CHECK(same_snapshot(cut.trace[k], cut_trace[k]));
}

TEST_CASE("stream serialization round trips and rejects corruption") {
    WaveletPyramid p = th::random_pyramid(16, 16, 2, 321);
    SpihtBitstream bs = encode(p);
    std::vector<uint8_t> wire = bs.serialize();
    SpihtBitstream back = SpihtBitstream::parse(wire);
    CHECK(back.float_mode == bs.float_mode);
    CHECK(back.remspiht == bs.remspiht);
    CHECK(back.has_mask == bs.has_mask);
    CHECK(back.all_zero == bs.all_zero);
    CHECK(back.width == bs.width);
    CHECK(back.height == bs.height);
    CHECK(back.levels == bs.levels);
    CHECK(back.P == bs.P);
    CHECK(back.scale_shift == bs.scale_shift);
    CHECK(back.q_num == bs.q_num);
    CHECK(back.q_den == bs.q_den);
    CHECK(back.payload_bit_count == bs.payload_bit_count);
    CHECK(back.payload == bs.payload);
    CHECK(decode(back).coeffs == p.coeffs);

    auto corrupt = [&](size_t pos, uint8_t val) {
        std::vector<uint8_t> c = wire;
        c[pos] = val;
        return c;
    };
    CHECK_THROWS_AS(SpihtBitstream::parse(corrupt(0, 'X')), FormatError);
    CHECK_THROWS_AS(SpihtBitstream::parse(corrupt(4, 0x10)), FormatError); // unknown flag
    // the coder flag without a mask parses (layout unchanged) but cannot decode
    SpihtBitstream odd = SpihtBitstream::parse(corrupt(4, 0x02));
    CHECK(odd.remspiht);
    CHECK_THROWS_AS(decode(odd), FormatError);

    // zero width
    std::vector<uint8_t> zw = wire;
    zw[5] = 0;
    zw[6] = 0;
    CHECK_THROWS_AS(SpihtBitstream::parse(zw), FormatError);
    // zero quantization denominator
    std::vector<uint8_t> zq = wire;
    zq[14] = 0;
    zq[15] = 0;
    CHECK_THROWS_AS(SpihtBitstream::parse(zq), FormatError);
    // truncated header
    std::vector<uint8_t> short_hdr(wire.begin(), wire.begin() + 10);
    CHECK_THROWS_AS(SpihtBitstream::parse(short_hdr), FormatError);
    // trailing junk
    std::vector<uint8_t> extra = wire;
    extra.push_back(0);
    CHECK_THROWS_AS(SpihtBitstream::parse(extra), FormatError);

    // short payload parses but only decodes with an explicit prefix
    std::vector<uint8_t> shorter(wire.begin(), wire.end() - 1);
    SpihtBitstream trunc = SpihtBitstream::parse(shorter);
    CHECK_THROWS_AS(decode(trunc), TruncationError);
    CHECK_NOTHROW(decode(trunc, (trunc.payload.size()) * 8));
}

TEST_CASE("dimension sanity is enforced when parsing") {
    WaveletPyramid p = th::random_pyramid(16, 16, 2, 11);
    std::vector<uint8_t> wire = encode(p).serialize();
    std::vector<uint8_t> bad = wire;
    bad[6] = 20; // width 20 with levels 2 violates divisibility
    CHECK_THROWS_AS(SpihtBitstream::parse(bad), FormatError);
}
