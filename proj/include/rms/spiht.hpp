#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rms/wavelet.hpp"

namespace rms {

struct Coord {
    int i = 0;
    int j = 0;
    bool operator==(const Coord&) const = default;
};

inline constexpr uint64_t kUnbounded = ~0ull;

struct BitCounters {
    uint64_t significance = 0;
    uint64_t sign = 0;
    uint64_t refinement = 0;
    uint64_t total() const { return significance + sign + refinement; }
};

struct MaxBitplane {
    int P = 0;
    bool all_zero = false;
};

// P = floor(log2 max|c|); all_zero set when every coefficient is 0.
MaxBitplane max_bitplane(const WaveletPyramid& pyr);

// T(u) = 2^(P-u); u outside [0,P] is a RangeError.
int64_t threshold(int P, int u);

// Spatial-orientation tree children. In each 2x2 LL group the top-left member
// is childless and the other three root the trees of the same-position 2x2
// block in HL/LH/HH at the coarsest level; detail coefficients above the finest
// level have the standard {2i,2i+1}x{2j,2j+1} children; finest-level ones none.
std::vector<Coord> offspring(Coord c, const WaveletPyramid& pyr);

// Lists after each pass, for encoder/decoder synchrony checks.
struct ListSnapshot {
    std::vector<Coord> lip;
    std::vector<std::pair<Coord, int>> lis; // 0 = type A, 1 = type B
    std::vector<std::pair<Coord, int>> lsp; // coord, pass found
};

struct SpihtBitstream {
    // header
    bool float_mode = false; // flags bit0: transform was OrthonormalFloat
    bool remspiht = false;   // flags bit1: weighted/pruned coder
    bool has_mask = false;   // flags bit2
    bool all_zero = false;   // flags bit3
    uint16_t width = 0;
    uint16_t height = 0;
    uint8_t levels = 0;
    uint8_t P = 0;
    uint8_t scale_shift = 0;
    uint16_t q_num = 1; // quantization step as a fraction, 1/1 in integer mode
    uint16_t q_den = 1;
    std::vector<uint8_t> mask_rle; // RLE body, present iff has_mask

    // payload
    std::vector<uint8_t> payload; // bits packed MSB-first, zero-padded
    uint32_t payload_bit_count = 0;

    // encoder diagnostics, not serialized
    BitCounters counters;
    std::vector<uint64_t> pass_bits; // cumulative payload bits after each completed pass
    std::vector<ListSnapshot> trace; // filled when encoding with tracing enabled

    std::vector<uint8_t> serialize() const;
    static SpihtBitstream parse(const std::vector<uint8_t>& bytes);

    uint64_t header_bits() const;
    uint64_t total_bits() const { return header_bits() + payload_bit_count; }
};

// Bitplane-codes the pyramid. max_bits bounds the TOTAL stream size (header
// included); encoding stops exactly at the budget, mid-schedule if needed.
SpihtBitstream encode(const WaveletPyramid& pyr, uint64_t max_bits = kUnbounded,
                      bool with_trace = false);

// Mirrors the encoder's schedule bit-for-bit. Magnitudes accumulate exactly;
// on a truncated stream every significant coefficient gets +T(u_last)/2
// (midpoint of its uncertainty interval). Handles both coder variants.
WaveletPyramid decode(const SpihtBitstream& bs, std::optional<uint64_t> upto_bits = {},
                      std::vector<ListSnapshot>* trace = nullptr);

} // namespace rms
