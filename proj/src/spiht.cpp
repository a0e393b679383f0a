#include "rms/spiht.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "rms/bitio.hpp"
#include "spiht_internal.hpp"

namespace rms {

namespace detail {

SetMaxima compute_set_maxima(const Shape& s, const std::vector<int64_t>& v) {
    SetMaxima m;
    m.dmax.assign(v.size(), 0);
    m.lmax.assign(v.size(), 0);
    Coord kids[4];
    auto fill = [&](Coord c) {
        int nk = offspring_of(s, c, kids);
        if (nk == 0)
            return;
        int64_t dm = 0, lm = 0;
        for (int q = 0; q < nk; ++q) {
            size_t ki = s.idx(kids[q]);
            int64_t av = std::llabs(v[ki]);
            dm = std::max(dm, std::max(av, m.dmax[ki]));
            lm = std::max(lm, m.dmax[ki]);
        }
        m.dmax[s.idx(c)] = dm;
        m.lmax[s.idx(c)] = lm;
    };
    // children live one level below, so walk coarser bands after finer ones
    for (int l = 2; l <= s.L; ++l) {
        int hw = s.w >> l, hh = s.h >> l;
        for (int i = 0; i < hh; ++i)
            for (int j = 0; j < hw; ++j) {
                fill({i, hw + j});      // HL
                fill({hh + i, j});      // LH
                fill({hh + i, hw + j}); // HH
            }
    }
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j)
            fill({i, j});
    return m;
}

MaskSets compute_mask_sets(const Shape& s, const std::vector<uint8_t>& mask) {
    MaskSets m;
    m.any_d.assign(mask.size(), 0);
    m.any_l.assign(mask.size(), 0);
    Coord kids[4];
    auto fill = [&](Coord c) {
        int nk = offspring_of(s, c, kids);
        if (nk == 0)
            return;
        uint8_t ad = 0, al = 0;
        for (int q = 0; q < nk; ++q) {
            size_t ki = s.idx(kids[q]);
            ad |= mask[ki] | m.any_d[ki];
            al |= m.any_d[ki];
        }
        m.any_d[s.idx(c)] = ad;
        m.any_l[s.idx(c)] = al;
    };
    for (int l = 2; l <= s.L; ++l) {
        int hw = s.w >> l, hh = s.h >> l;
        for (int i = 0; i < hh; ++i)
            for (int j = 0; j < hw; ++j) {
                fill({i, hw + j});
                fill({hh + i, j});
                fill({hh + i, hw + j});
            }
    }
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j)
            fill({i, j});
    return m;
}

std::vector<uint8_t> mask_to_rle(const std::vector<uint8_t>& mask) {
    std::vector<uint8_t> rle;
    size_t n = mask.size();
    size_t pos = 0;
    uint8_t expect = 0;
    while (pos < n) {
        size_t run = 0;
        while (pos + run < n && (mask[pos + run] != 0) == (expect != 0))
            ++run;
        leb128_write(rle, run);
        pos += run;
        expect ^= 1;
    }
    return rle;
}

std::vector<uint8_t> rle_to_mask(const uint8_t* data, size_t len, size_t expected_bits) {
    std::vector<uint8_t> mask(expected_bits, 0);
    const uint8_t* p = data;
    const uint8_t* end = data + len;
    size_t pos = 0;
    uint8_t val = 0;
    while (pos < expected_bits) {
        uint64_t run = leb128_read(p, end);
        if (run > expected_bits - pos)
            throw FormatError("mask run overflows grid");
        if (val)
            std::fill(mask.begin() + pos, mask.begin() + pos + run, uint8_t{1});
        pos += run;
        val ^= 1;
    }
    if (p != end)
        throw FormatError("trailing bytes in mask RLE");
    return mask;
}

namespace {

struct EncoderIO {
    const Shape& s;
    const std::vector<int64_t>& v;
    const SetMaxima& sm;
    int P;
    uint64_t cap = ~0ull;
    BitWriter bw;
    BitCounters cnt;

    int64_t T(int u) const { return int64_t{1} << (P - u); }
    void put(bool b, uint64_t BitCounters::*k) {
        if (bw.bit_count() >= cap)
            throw StopCoding{};
        bw.put(b);
        ++(cnt.*k);
    }
    bool test_pixel(Coord c, int u) {
        bool b = std::llabs(v[s.idx(c)]) >= T(u);
        put(b, &BitCounters::significance);
        return b;
    }
    void found_significant(Coord c, int) {
        put(v[s.idx(c)] < 0, &BitCounters::sign);
    }
    bool test_set_D(Coord c, int u) {
        bool b = sm.dmax[s.idx(c)] >= T(u);
        put(b, &BitCounters::significance);
        return b;
    }
    bool test_set_L(Coord c, int u) {
        bool b = sm.lmax[s.idx(c)] >= T(u);
        put(b, &BitCounters::significance);
        return b;
    }
    void refine(Coord c, int u) {
        put((std::llabs(v[s.idx(c)]) >> (P - u)) & 1, &BitCounters::refinement);
    }
    uint64_t bits_done() const { return bw.bit_count(); }
};

struct DecoderIO {
    const Shape& s;
    int P;
    BitReader br;
    uint64_t limit;
    std::vector<int64_t> mag;
    std::vector<uint8_t> neg, sig;

    DecoderIO(const Shape& sh, int p, const uint8_t* data, uint64_t lim)
        : s(sh), P(p), br(data, lim), limit(lim) {
        size_t n = static_cast<size_t>(sh.w) * sh.h;
        mag.assign(n, 0);
        neg.assign(n, 0);
        sig.assign(n, 0);
    }

    bool get() {
        if (br.pos() >= limit)
            throw StopCoding{};
        return br.get();
    }
    bool test_pixel(Coord, int) { return get(); }
    void found_significant(Coord c, int u) {
        bool n = get(); // read before touching state: a dangling significance
        size_t t = s.idx(c); // bit at the budget edge must not half-apply
        sig[t] = 1;
        neg[t] = n ? 1 : 0;
        mag[t] = int64_t{1} << (P - u);
    }
    bool test_set_D(Coord, int) { return get(); }
    bool test_set_L(Coord, int) { return get(); }
    void refine(Coord c, int u) {
        if (get())
            mag[s.idx(c)] += int64_t{1} << (P - u);
    }
    uint64_t bits_done() const { return br.pos(); }
};

} // namespace

SpihtBitstream encode_ints(const Shape& s, std::vector<int64_t> values, Mode mode,
                           uint16_t q_num, uint16_t q_den, uint8_t scale_shift,
                           const std::vector<uint8_t>* mask, uint64_t max_bits,
                           bool prefilter, bool with_trace) {
    SpihtBitstream bs;
    bs.float_mode = (mode == Mode::OrthonormalFloat);
    bs.remspiht = mask != nullptr;
    bs.has_mask = mask != nullptr;
    bs.width = static_cast<uint16_t>(s.w);
    bs.height = static_cast<uint16_t>(s.h);
    bs.levels = static_cast<uint8_t>(s.L);
    bs.scale_shift = scale_shift;
    bs.q_num = q_num;
    bs.q_den = q_den;
    if (mask)
        bs.mask_rle = mask_to_rle(*mask);

    if (max_bits != kUnbounded && max_bits < bs.header_bits())
        throw BudgetTooSmall("bit budget below header size");

    int64_t maxabs = 0;
    for (int64_t x : values)
        maxabs = std::max(maxabs, static_cast<int64_t>(std::llabs(x)));
    if (maxabs == 0) {
        bs.all_zero = true;
        bs.P = 0;
        return bs;
    }
    int P = std::bit_width(static_cast<uint64_t>(maxabs)) - 1;
    bs.P = static_cast<uint8_t>(P);

    SetMaxima sm = compute_set_maxima(s, values);
    MaskSets ms;
    if (mask)
        ms = compute_mask_sets(s, *mask);

    EncoderIO io{s, values, sm, P, ~0ull, {}, {}};
    if (max_bits != kUnbounded)
        io.cap = max_bits - bs.header_bits();
    ScheduleResult res = run_schedule(s, P, io, mask, mask ? &ms : nullptr, prefilter,
                                      with_trace ? &bs.trace : nullptr);
    bs.payload_bit_count = static_cast<uint32_t>(io.bw.bit_count());
    bs.payload = io.bw.finish();
    bs.counters = io.cnt;
    bs.pass_bits = res.pass_bits;
    return bs;
}

} // namespace detail

MaxBitplane max_bitplane(const WaveletPyramid& pyr) {
    double maxabs = 0;
    for (double c : pyr.coeffs)
        maxabs = std::max(maxabs, std::fabs(c));
    if (maxabs == 0.0)
        return {0, true};
    long long r = std::llround(maxabs);
    if (r > 0 && std::fabs(maxabs - static_cast<double>(r)) < 1e-9)
        return {static_cast<int>(std::bit_width(static_cast<uint64_t>(r))) - 1, false};
    return {static_cast<int>(std::floor(std::log2(maxabs))), false};
}

int64_t threshold(int P, int u) {
    if (P < 0 || u < 0 || u > P || P - u > 62)
        throw RangeError("threshold: pass number out of range");
    return int64_t{1} << (P - u);
}

std::vector<Coord> offspring(Coord c, const WaveletPyramid& pyr) {
    if (c.i < 0 || c.j < 0 || c.i >= pyr.height || c.j >= pyr.width)
        throw IndexError("offspring: coordinate out of range");
    detail::Shape s{pyr.width, pyr.height, pyr.levels};
    Coord kids[4];
    int nk = detail::offspring_of(s, c, kids);
    return std::vector<Coord>(kids, kids + nk);
}

std::vector<uint8_t> SpihtBitstream::serialize() const {
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("RMS1"), 4);
    uint8_t flags = (float_mode ? 1 : 0) | (remspiht ? 2 : 0) | (has_mask ? 4 : 0) |
                    (all_zero ? 8 : 0);
    w.u8(flags);
    w.u16be(width);
    w.u16be(height);
    w.u8(levels);
    w.u8(P);
    w.u8(scale_shift);
    w.u16be(q_num);
    w.u16be(q_den);
    if (has_mask) {
        w.u32be(static_cast<uint32_t>(mask_rle.size()));
        w.bytes(mask_rle.data(), mask_rle.size());
    }
    w.u32be(payload_bit_count);
    w.bytes(payload.data(), payload.size());
    return w.take();
}

SpihtBitstream SpihtBitstream::parse(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    const uint8_t* magic = r.bytes(4);
    if (std::memcmp(magic, "RMS1", 4) != 0)
        throw FormatError("bad magic");
    uint8_t flags = r.u8();
    if (flags & 0xf0)
        throw FormatError("unknown flag bits");

    SpihtBitstream bs;
    bs.float_mode = flags & 1;
    bs.remspiht = flags & 2;
    bs.has_mask = flags & 4;
    bs.all_zero = flags & 8;
    bs.width = r.u16be();
    bs.height = r.u16be();
    bs.levels = r.u8();
    bs.P = r.u8();
    bs.scale_shift = r.u8();
    bs.q_num = r.u16be();
    bs.q_den = r.u16be();
    if (bs.width == 0 || bs.height == 0 || bs.levels == 0)
        throw FormatError("bad dimensions");
    if (bs.q_num == 0 || bs.q_den == 0)
        throw FormatError("bad quantization step");
    int div = 1 << (bs.levels + 1);
    if (bs.width % div != 0 || bs.height % div != 0)
        throw FormatError("dimensions not divisible by 2^(levels+1)");
    if (bs.has_mask) {
        uint32_t len = r.u32be();
        if (len > r.remaining())
            throw FormatError("mask length overruns stream");
        const uint8_t* m = r.bytes(len);
        bs.mask_rle.assign(m, m + len);
    }
    bs.payload_bit_count = r.u32be();
    size_t avail = r.remaining();
    if (avail > (static_cast<size_t>(bs.payload_bit_count) + 7) / 8)
        throw FormatError("trailing bytes after payload");
    const uint8_t* p = r.bytes(avail);
    bs.payload.assign(p, p + avail);
    return bs;
}

uint64_t SpihtBitstream::header_bits() const {
    uint64_t bytes = 4 + 1 + 2 + 2 + 1 + 1 + 1 + 2 + 2 + 4;
    if (has_mask)
        bytes += 4 + mask_rle.size();
    return bytes * 8;
}

SpihtBitstream encode(const WaveletPyramid& pyr, uint64_t max_bits, bool with_trace) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    detail::Shape s{pyr.width, pyr.height, pyr.levels};
    size_t n = pyr.coeffs.size();
    std::vector<int64_t> ints(n);
    uint16_t q_num = 1, q_den = 1;
    if (pyr.mode == Mode::OrthonormalFloat)
        q_den = 64; // quantization step 1/64
    for (size_t t = 0; t < n; ++t)
        ints[t] = std::llround(pyr.coeffs[t] * q_den / q_num);
    return detail::encode_ints(s, std::move(ints), pyr.mode, q_num, q_den,
                               /*scale_shift=*/0, /*mask=*/nullptr, max_bits,
                               /*prefilter=*/false, with_trace);
}

WaveletPyramid decode(const SpihtBitstream& bs, std::optional<uint64_t> upto_bits,
                      std::vector<ListSnapshot>* trace) {
    if (bs.q_num == 0 || bs.q_den == 0)
        throw FormatError("bad quantization step");
    if (bs.remspiht && !bs.has_mask)
        throw FormatError("weighted stream without mask");
    if (bs.has_mask && !bs.remspiht)
        throw FormatError("mask present on plain stream");
    detail::Shape s{bs.width, bs.height, bs.levels};
    check_pyramid_dims(s.w, s.h, s.L);

    WaveletPyramid pyr;
    pyr.width = s.w;
    pyr.height = s.h;
    pyr.levels = s.L;
    pyr.mode = bs.float_mode ? Mode::OrthonormalFloat : Mode::IntegerLifting;
    pyr.coeffs.assign(static_cast<size_t>(s.w) * s.h, 0.0);
    if (bs.all_zero)
        return pyr;

    std::vector<uint8_t> mask;
    detail::MaskSets ms;
    if (bs.has_mask) {
        mask = detail::rle_to_mask(bs.mask_rle.data(), bs.mask_rle.size(),
                                   pyr.coeffs.size());
        ms = detail::compute_mask_sets(s, mask);
    }

    uint64_t declared = bs.payload_bit_count;
    uint64_t avail = static_cast<uint64_t>(bs.payload.size()) * 8;
    uint64_t limit = declared;
    if (avail < declared) {
        if (!upto_bits)
            throw TruncationError("payload shorter than declared bit count");
        limit = avail;
    }
    if (upto_bits)
        limit = std::min(limit, *upto_bits);

    detail::DecoderIO io(s, bs.P, bs.payload.data(), limit);
    detail::ScheduleResult res =
        detail::run_schedule(s, bs.P, io, bs.has_mask ? &mask : nullptr,
                             bs.has_mask ? &ms : nullptr, /*prefilter=*/false, trace);

    double q = static_cast<double>(bs.q_num) / bs.q_den;
    double mid = res.completed ? 0.0 : std::ldexp(0.5, bs.P - res.last_pass);
    for (size_t t = 0; t < pyr.coeffs.size(); ++t) {
        if (!io.sig[t])
            continue;
        double m = static_cast<double>(io.mag[t]) + mid;
        double val = io.neg[t] ? -m : m;
        if (bs.remspiht)
            val = std::ldexp(val, -static_cast<int>(bs.scale_shift));
        pyr.coeffs[t] = val * q;
    }
    return pyr;
}

} // namespace rms
