#pragma once

// Shared SPIHT machinery: one list-schedule driver templated over the bit I/O
// direction so encoder and decoder cannot drift apart, plus the support-mask
// plumbing used by the weighted/pruned coder variant.

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "rms/spiht.hpp"

namespace rms::detail {

struct StopCoding {}; // internal control flow: bit budget / prefix exhausted

struct Shape {
    int w = 0, h = 0, L = 0;
    size_t idx(Coord c) const { return static_cast<size_t>(c.i) * w + c.j; }
    int ll_w() const { return w >> L; }
    int ll_h() const { return h >> L; }
    bool in_ll(Coord c) const { return c.i < ll_h() && c.j < ll_w(); }
};

// 0 = LL, 1..L = detail levels (1 finest)
inline int level_of(const Shape& s, Coord c) {
    for (int l = 1; l <= s.L; ++l) {
        if (c.i >= (s.h >> l) || c.j >= (s.w >> l))
            return l;
    }
    return 0;
}

inline bool is_group_anchor(Coord c) { return (c.i & 1) == 0 && (c.j & 1) == 0; }

// Children of c, or count 0. Appends to out[0..3].
inline int offspring_of(const Shape& s, Coord c, Coord out[4]) {
    int lvl = level_of(s, c);
    int ai, aj;
    if (lvl == 0) {
        if (is_group_anchor(c))
            return 0;
        ai = (c.i & ~1) + ((c.i & 1) ? s.ll_h() : 0);
        aj = (c.j & ~1) + ((c.j & 1) ? s.ll_w() : 0);
    } else if (lvl == 1) {
        return 0;
    } else {
        ai = 2 * c.i;
        aj = 2 * c.j;
    }
    out[0] = {ai, aj};
    out[1] = {ai, aj + 1};
    out[2] = {ai + 1, aj};
    out[3] = {ai + 1, aj + 1};
    return 4;
}

inline bool has_offspring(const Shape& s, Coord c) {
    int lvl = level_of(s, c);
    if (lvl == 0)
        return !is_group_anchor(c);
    return lvl > 1;
}

// true when the descendant set reaches past the direct children
inline bool has_grandchildren(const Shape& s, Coord c) {
    int lvl = level_of(s, c);
    if (lvl == 0)
        return !is_group_anchor(c) && s.L >= 2;
    return lvl >= 3;
}

// Per-coordinate maxima over the descendant set D (dmax) and the
// grand-descendant set L = D minus children (lmax), bottom-up.
struct SetMaxima {
    std::vector<int64_t> dmax, lmax;
};

SetMaxima compute_set_maxima(const Shape& s, const std::vector<int64_t>& v);

// Same recursion with OR over a 0/1 support mask.
struct MaskSets {
    std::vector<uint8_t> any_d, any_l;
};

MaskSets compute_mask_sets(const Shape& s, const std::vector<uint8_t>& mask);

// Run-length encoding of a row-major bit mask: alternating zero-run/one-run
// LEB128 lengths, starting with the zero-run (possibly 0).
std::vector<uint8_t> mask_to_rle(const std::vector<uint8_t>& mask);
std::vector<uint8_t> rle_to_mask(const uint8_t* data, size_t len, size_t expected_bits);

struct ScheduleResult {
    int last_pass = -1;     // pass during which bits ran out, or P when completed
    bool completed = false; // full schedule ran without hitting the bit limit
    std::vector<uint64_t> pass_bits;
};

// The Said-Pearlman schedule. IO supplies/consumes the actual bits:
//   bool test_pixel(Coord, pass)       significance of one coefficient
//   void found_significant(Coord, pass)  sign bit exchange (must be atomic:
//                                        decoder state changes only after the
//                                        bit was successfully read)
//   bool test_set_D(Coord, pass) / test_set_L(Coord, pass)
//   void refine(Coord, pass)
//   uint64_t bits_done()
// All methods throw StopCoding once the bit limit is reached.
//
// mask != nullptr enables pruning: masked-off coefficients and sets are never
// tested or emitted, and dead list entries are deleted after each sorting pass.
// prefilter additionally keeps them out of the initial lists; the emitted bits
// are identical either way.
template <class IO>
ScheduleResult run_schedule(const Shape& s, int P, IO& io,
                            const std::vector<uint8_t>* mask,
                            const MaskSets* msets, bool prefilter,
                            std::vector<ListSnapshot>* trace) {
    struct LipEnt { Coord c; bool dead; };
    struct LisEnt { Coord c; bool typeB; bool dead; };
    struct LspEnt { Coord c; int found; };
    std::vector<LipEnt> lip;
    std::vector<LisEnt> lis;
    std::vector<LspEnt> lsp;

    auto m_on = [&](Coord c) { return !mask || (*mask)[s.idx(c)] != 0; };
    auto d_on = [&](Coord c) { return !mask || msets->any_d[s.idx(c)] != 0; };
    auto l_on = [&](Coord c) { return !mask || msets->any_l[s.idx(c)] != 0; };

    for (int i = 0; i < s.ll_h(); ++i) {
        for (int j = 0; j < s.ll_w(); ++j) {
            Coord c{i, j};
            if (!prefilter || m_on(c))
                lip.push_back({c, false});
            if (has_offspring(s, c) && (!prefilter || d_on(c)))
                lis.push_back({c, false, false});
        }
    }

    ScheduleResult res;
    Coord kids[4];
    try {
        for (int u = 0; u <= P; ++u) {
            res.last_pass = u;

            // sorting pass: LIP scan (nothing is appended here)
            for (auto& e : lip) {
                if (e.dead || !m_on(e.c))
                    continue;
                if (io.test_pixel(e.c, u)) {
                    io.found_significant(e.c, u);
                    lsp.push_back({e.c, u});
                    e.dead = true;
                }
            }

            // sorting pass: LIS scan; entries appended mid-pass are reached by
            // the index loop and processed within this same pass
            for (size_t t = 0; t < lis.size(); ++t) {
                LisEnt e = lis[t]; // copy: the vector may grow below
                if (e.dead)
                    continue;
                if (!e.typeB) {
                    if (!d_on(e.c))
                        continue;
                    if (!io.test_set_D(e.c, u))
                        continue;
                    int nk = offspring_of(s, e.c, kids);
                    for (int q = 0; q < nk; ++q) {
                        Coord o = kids[q];
                        if (!m_on(o))
                            continue;
                        if (io.test_pixel(o, u)) {
                            io.found_significant(o, u);
                            lsp.push_back({o, u});
                        } else {
                            lip.push_back({o, false});
                        }
                    }
                    if (has_grandchildren(s, e.c))
                        lis.push_back({e.c, true, false});
                    lis[t].dead = true;
                } else {
                    if (!l_on(e.c))
                        continue;
                    if (!io.test_set_L(e.c, u))
                        continue;
                    int nk = offspring_of(s, e.c, kids);
                    for (int q = 0; q < nk; ++q)
                        lis.push_back({kids[q], false, false});
                    lis[t].dead = true;
                }
            }

            // prune: masked-off survivors leave the lists after the sorting pass
            if (mask) {
                for (auto& e : lip)
                    if (!e.dead && !m_on(e.c))
                        e.dead = true;
                for (auto& e : lis)
                    if (!e.dead && (e.typeB ? !l_on(e.c) : !d_on(e.c)))
                        e.dead = true;
            }
            std::erase_if(lip, [](const LipEnt& e) { return e.dead; });
            std::erase_if(lis, [](const LisEnt& e) { return e.dead; });

            // refinement pass: entries found in earlier passes only
            for (const auto& e : lsp)
                if (e.found < u)
                    io.refine(e.c, u);

            res.pass_bits.push_back(io.bits_done());
            if (trace) {
                ListSnapshot snap;
                for (const auto& e : lip)
                    snap.lip.push_back(e.c);
                for (const auto& e : lis)
                    snap.lis.emplace_back(e.c, e.typeB ? 1 : 0);
                for (const auto& e : lsp)
                    snap.lsp.emplace_back(e.c, e.found);
                trace->push_back(std::move(snap));
            }
        }
        res.completed = true;
    } catch (const StopCoding&) {
        res.completed = false;
    }
    return res;
}

// Integer-domain encode shared by both coders. `values` must already be
// quantized (and rescaled, for the weighted variant); mask-0 entries zero.
SpihtBitstream encode_ints(const Shape& s, std::vector<int64_t> values, Mode mode,
                           uint16_t q_num, uint16_t q_den, uint8_t scale_shift,
                           const std::vector<uint8_t>* mask, uint64_t max_bits,
                           bool prefilter, bool with_trace);

} // namespace rms::detail
