#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "rms/spiht.hpp"
#include "rms/weighting.hpp"

namespace rms {

// Mask from cross-band correlation with the LL threshold.
struct CaseI {
    int u0 = 0;
    MaskPolicy policy = MaskPolicy::All;
};

// Mask from texture clustering of tree features.
struct CaseII {
    int k = 2;
    uint32_t seed = 0;
    int em_iters = 0;
};

struct RemspihtConfig {
    int scale_shift = 2;
    double m = 0.5; // (0,1]: fraction of coefficients retained; >1: absolute count
    double lambda = 4.0;
    std::variant<CaseI, CaseII> mask_source = CaseII{};
    uint64_t budget = kUnbounded; // total stream bits, header and mask included
    bool prefilter_lists = false; // filter dead entries at init instead of
                                  // pruning after the first pass; same bits
};

WeightMap derive_weights(const WaveletPyramid& pyr, const RemspihtConfig& cfg,
                         Exec ex = Exec::Parallel);

// Weighted, pruned coding: blocked-out coefficients are zeroed, the support is
// scaled by 2^scale_shift as one unit (so the decoder can invert it from the
// single header field), the support mask travels in the header, and dead list
// entries are pruned at both ends after each sorting pass.
SpihtBitstream encode_remspiht(const WaveletPyramid& pyr, const RemspihtConfig& cfg,
                               bool with_trace = false, Exec ex = Exec::Parallel);

SpihtBitstream encode_remspiht(const WaveletPyramid& pyr, const WeightMap& weights,
                               int scale_shift, uint64_t budget = kUnbounded,
                               bool prefilter = false, bool with_trace = false);

WaveletPyramid decode_remspiht(const SpihtBitstream& bs,
                               std::optional<uint64_t> upto_bits = {},
                               std::vector<ListSnapshot>* trace = nullptr);

} // namespace rms
