#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rms/exec.hpp"
#include "rms/spiht.hpp"
#include "rms/wavelet.hpp"

namespace rms {

// One feature vector per spatial-orientation tree: mean |c| in each of
// LH/HL/HH per level, coarsest level first (3*levels entries).
struct TreeFeature {
    int tree_id = 0;
    Coord root;
    std::vector<double> vec;
};

std::vector<TreeFeature> extract_features(const WaveletPyramid& pyr, Exec ex = Exec::Parallel);

struct KmeansResult {
    std::vector<int> assignments; // tree_id -> cluster
    std::vector<std::vector<double>> centroids;
    std::vector<double> objective; // squared-error objective per iteration
};

// Lloyd iterations, centroids seeded on k distinct input points. Stops when
// assignments no longer change or max_iter is reached. Deterministic per seed.
KmeansResult kmeans(const std::vector<TreeFeature>& features, int k, int max_iter,
                    uint32_t seed, Exec ex = Exec::Parallel);

// Per feature dimension: zero-mean Gaussian pair with a "high" and a "low"
// variance state and a state prior.
struct TwoStateGaussian {
    double var_h = 1.0;
    double var_l = 1.0;
    double p_h = 0.5;
};

struct MixtureComponent {
    std::vector<TwoStateGaussian> dims;
};

struct MixtureModel {
    std::vector<double> alpha; // mixing coefficients, sum 1
    std::vector<MixtureComponent> components;
};

MixtureModel model_from_clusters(const std::vector<TreeFeature>& features,
                                 const std::vector<int>& assignments, int k);

double log_likelihood(const std::vector<TreeFeature>& features, const MixtureModel& model);

// One EM update: Bayes posteriors over components, then mixing coefficients
// and per-state moments re-estimated from them.
MixtureModel em_step(const std::vector<TreeFeature>& features, const MixtureModel& model);

// Hard re-assignment by maximum posterior.
std::vector<int> map_assignments(const std::vector<TreeFeature>& features,
                                 const MixtureModel& model);

struct ClusterStat {
    int cluster_id = 0;
    size_t size = 0;          // member trees
    double entropy_bits = 0;  // over integer-rounded |c| of the member trees' coefficients
    size_t nonzero_count = 0; // coefficients with rounded |c| != 0
    double score = 0;
    bool empty = false;
};

using ClusterScoreFn = std::function<double(double entropy_bits, size_t nonzero_count)>;

std::vector<ClusterStat> cluster_stats(const WaveletPyramid& pyr,
                                       const std::vector<int>& assignments, int k,
                                       const ClusterScoreFn& score = {});

struct WeightMap {
    int width = 0;
    int height = 0;
    std::vector<double> w;

    double at(int i, int j) const { return w[static_cast<size_t>(i) * width + j]; }
    double& at(int i, int j) { return w[static_cast<size_t>(i) * width + j]; }
    bool on(int i, int j) const { return at(i, j) > 0.0; }
    size_t support_count() const {
        size_t n = 0;
        for (double x : w)
            n += x > 0.0;
        return n;
    }
};

// Rank all coefficients by their tree's normalized cluster score (ties: larger
// magnitude, then scan order). The top m get weight max(1, -1 + lambda*score),
// the rest 0; LL coefficients always keep weight >= 1.
WeightMap importance_weights(const WaveletPyramid& pyr, const std::vector<int>& assignments,
                             const std::vector<double>& cluster_scores, size_t m,
                             double lambda);

// Weight > 1: coefficient scaled by 2^scale_shift. Weight 0: blocked out.
WaveletPyramid rescale(const WaveletPyramid& pyr, const WeightMap& weights, int scale_shift);
WaveletPyramid unscale(const WaveletPyramid& pyr, const WeightMap& weights, int scale_shift);

enum class MaskPolicy { All, Any };

// Threshold from the LL band: T = 2^(floor(log2 max|LL|) - u0). A detail
// position is kept iff its LH/HL/HH triple at that level passes |c| >= T under
// the policy; LL positions are always kept.
WeightMap crossband_mask(const WaveletPyramid& pyr, int u0, MaskPolicy policy);

} // namespace rms
