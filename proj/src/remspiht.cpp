#include "rms/remspiht.hpp"

#include <cmath>
#include <utility>

#include "rms/errors.hpp"
#include "spiht_internal.hpp"

namespace rms {

namespace {

WeightMap weights_case2(const WaveletPyramid& pyr, const CaseII& c,
                        const RemspihtConfig& cfg, Exec ex) {
    if (c.k < 1)
        throw ArgumentError("cluster count must be at least 1");
    if (c.em_iters < 0)
        throw ArgumentError("negative EM iteration count");

    std::vector<TreeFeature> features = extract_features(pyr, ex);
    KmeansResult km = kmeans(features, c.k, /*max_iter=*/50, c.seed, ex);
    std::vector<int> assignments = std::move(km.assignments);
    if (c.em_iters > 0) {
        MixtureModel model = model_from_clusters(features, assignments, c.k);
        for (int it = 0; it < c.em_iters; ++it)
            model = em_step(features, model);
        assignments = map_assignments(features, model);
    }

    std::vector<ClusterStat> stats = cluster_stats(pyr, assignments, c.k);
    std::vector<double> scores(stats.size());
    for (size_t i = 0; i < stats.size(); ++i)
        scores[i] = stats[i].score;

    size_t n = pyr.coeffs.size();
    if (!(cfg.m > 0.0))
        throw ArgumentError("retained coefficient count must be positive");
    size_t m = cfg.m <= 1.0 ? static_cast<size_t>(std::llround(cfg.m * static_cast<double>(n)))
                            : static_cast<size_t>(std::llround(cfg.m));
    if (m > n)
        throw ArgumentError("retained coefficient count exceeds coefficient count");
    return importance_weights(pyr, assignments, scores, m, cfg.lambda);
}

} // namespace

WeightMap derive_weights(const WaveletPyramid& pyr, const RemspihtConfig& cfg, Exec ex) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    if (const CaseI* c1 = std::get_if<CaseI>(&cfg.mask_source))
        return crossband_mask(pyr, c1->u0, c1->policy);
    return weights_case2(pyr, std::get<CaseII>(cfg.mask_source), cfg, ex);
}

SpihtBitstream encode_remspiht(const WaveletPyramid& pyr, const RemspihtConfig& cfg,
                               bool with_trace, Exec ex) {
    WeightMap w = derive_weights(pyr, cfg, ex);
    return encode_remspiht(pyr, w, cfg.scale_shift, cfg.budget, cfg.prefilter_lists,
                           with_trace);
}

SpihtBitstream encode_remspiht(const WaveletPyramid& pyr, const WeightMap& weights,
                               int scale_shift, uint64_t budget, bool prefilter,
                               bool with_trace) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    if (weights.width != pyr.width || weights.height != pyr.height)
        throw ShapeError("weight map does not match pyramid");
    if (scale_shift < 0 || scale_shift > 30)
        throw ArgumentError("scale shift out of range");

    size_t n = pyr.coeffs.size();
    std::vector<uint8_t> mask(n);
    size_t support = 0;
    for (size_t t = 0; t < n; ++t) {
        mask[t] = weights.w[t] > 0.0;
        support += mask[t];
    }
    if (support == 0)
        throw EmptyMask("weight map has empty support");

    uint16_t q_num = 1, q_den = 1;
    if (pyr.mode == Mode::OrthonormalFloat)
        q_den = 64;
    // Quantize as the plain coder would, then scale the whole support as one
    // unit; only the mask and the shift travel, not the individual weights.
    int64_t unit = int64_t{1} << scale_shift;
    std::vector<int64_t> ints(n);
    for (size_t t = 0; t < n; ++t)
        ints[t] = mask[t] ? std::llround(pyr.coeffs[t] * q_den / q_num) * unit : 0;

    detail::Shape s{pyr.width, pyr.height, pyr.levels};
    return detail::encode_ints(s, std::move(ints), pyr.mode, q_num, q_den,
                               static_cast<uint8_t>(scale_shift), &mask, budget,
                               prefilter, with_trace);
}

WaveletPyramid decode_remspiht(const SpihtBitstream& bs, std::optional<uint64_t> upto_bits,
                               std::vector<ListSnapshot>* trace) {
    if (!bs.remspiht || !bs.has_mask)
        throw FormatError("not a weighted-coder stream");
    return decode(bs, upto_bits, trace);
}

} // namespace rms
