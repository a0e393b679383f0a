#include "rms/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "spiht_internal.hpp"

namespace rms {

namespace {

using detail::Shape;

std::vector<Coord> tree_roots(const Shape& s) {
    std::vector<Coord> roots;
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j)
            if (!detail::is_group_anchor({i, j}))
                roots.push_back({i, j});
    return roots;
}

// Preorder walk over all descendants of a root (the root itself excluded).
template <class F>
void for_each_descendant(const Shape& s, Coord root, F&& fn) {
    Coord kids[4];
    std::vector<Coord> stack;
    int nk = detail::offspring_of(s, root, kids);
    for (int q = nk - 1; q >= 0; --q)
        stack.push_back(kids[q]);
    while (!stack.empty()) {
        Coord c = stack.back();
        stack.pop_back();
        fn(c);
        nk = detail::offspring_of(s, c, kids);
        for (int q = nk - 1; q >= 0; --q)
            stack.push_back(kids[q]);
    }
}

int band_slot(Band b) {
    switch (b) {
    case Band::LH: return 0;
    case Band::HL: return 1;
    default: return 2; // HH
    }
}

constexpr double kVarFloor = 1e-12;
constexpr double kLog2Pi = 1.8378770664093453; // ln(2*pi)

double log_gauss0(double x, double var) {
    return -0.5 * (x * x / var + std::log(var) + kLog2Pi);
}

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity())
        return b;
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ln of the two-state density product over all dimensions
double log_density(const std::vector<double>& x, const MixtureComponent& comp) {
    double acc = 0;
    for (size_t d = 0; d < x.size(); ++d) {
        const TwoStateGaussian& g = comp.dims[d];
        double lh = g.p_h > 0 ? std::log(g.p_h) + log_gauss0(x[d], g.var_h)
                              : -std::numeric_limits<double>::infinity();
        double ll = g.p_h < 1 ? std::log(1.0 - g.p_h) + log_gauss0(x[d], g.var_l)
                              : -std::numeric_limits<double>::infinity();
        acc += log_sum_exp(lh, ll);
    }
    return acc;
}

} // namespace

std::vector<TreeFeature> extract_features(const WaveletPyramid& pyr, Exec ex) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    Shape s{pyr.width, pyr.height, pyr.levels};
    std::vector<Coord> roots = tree_roots(s);
    int L = pyr.levels;
    std::vector<TreeFeature> feats(roots.size());

    auto one = [&](size_t t) {
        TreeFeature& f = feats[t];
        f.tree_id = static_cast<int>(t);
        f.root = roots[t];
        std::vector<double> sum(3 * static_cast<size_t>(L), 0.0);
        std::vector<size_t> cnt(3 * static_cast<size_t>(L), 0);
        for_each_descendant(s, roots[t], [&](Coord c) {
            Subband sb = subband_of(pyr, c.i, c.j);
            size_t slot = 3 * static_cast<size_t>(L - sb.level) + band_slot(sb.band);
            sum[slot] += std::fabs(pyr.at(c.i, c.j));
            ++cnt[slot];
        });
        f.vec.resize(sum.size());
        for (size_t d = 0; d < sum.size(); ++d)
            f.vec[d] = cnt[d] ? sum[d] / static_cast<double>(cnt[d]) : 0.0;
    };

    if (ex == Exec::Parallel) {
        long long n = static_cast<long long>(roots.size());
#pragma omp parallel for schedule(static)
        for (long long t = 0; t < n; ++t)
            one(static_cast<size_t>(t));
    } else {
        for (size_t t = 0; t < roots.size(); ++t)
            one(t);
    }
    return feats;
}

KmeansResult kmeans(const std::vector<TreeFeature>& features, int k, int max_iter,
                    uint32_t seed, Exec ex) {
    size_t n = features.size();
    if (k < 1 || static_cast<size_t>(k) > n)
        throw ArgumentError("kmeans: need 1 <= k <= point count");
    size_t dim = features[0].vec.size();

    // seed centroids on k distinct points via a partial Fisher-Yates shuffle;
    // plain modulo keeps the draw identical across platforms
    std::mt19937 rng(seed);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    for (int t = 0; t < k; ++t) {
        size_t r = t + rng() % (n - t);
        std::swap(order[t], order[r]);
    }
    std::vector<std::vector<double>> cent(k);
    for (int c = 0; c < k; ++c)
        cent[c] = features[order[c]].vec;

    KmeansResult res;
    res.assignments.assign(n, -1);

    auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0;
        for (size_t d = 0; d < dim; ++d) {
            double diff = a[d] - b[d];
            acc += diff * diff;
        }
        return acc;
    };

    size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<int> next(n);
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step, with the objective accumulated per block so the
        // serial and parallel paths agree bit-for-bit
        std::vector<double> partial(nblocks, 0.0);
        auto assign_block = [&](size_t b) {
            size_t lo = b * kReduceBlock, hi = std::min(n, lo + kReduceBlock);
            double acc = 0;
            for (size_t t = lo; t < hi; ++t) {
                int best = 0;
                double bestd = dist2(features[t].vec, cent[0]);
                for (int c = 1; c < k; ++c) {
                    double d = dist2(features[t].vec, cent[c]);
                    if (d < bestd) {
                        bestd = d;
                        best = c;
                    }
                }
                next[t] = best;
                acc += bestd;
            }
            partial[b] = acc;
        };
        if (ex == Exec::Parallel) {
            long long nb = static_cast<long long>(nblocks);
#pragma omp parallel for schedule(static)
            for (long long b = 0; b < nb; ++b)
                assign_block(static_cast<size_t>(b));
        } else {
            for (size_t b = 0; b < nblocks; ++b)
                assign_block(b);
        }
        double obj = 0;
        for (double p : partial)
            obj += p;
        res.objective.push_back(obj);

        bool changed = next != res.assignments;
        res.assignments = next;
        if (!changed)
            break;

        // update step: blockwise partial sums merged in block order
        std::vector<std::vector<double>> sums(nblocks);
        std::vector<std::vector<size_t>> cnts(nblocks);
        auto update_block = [&](size_t b) {
            size_t lo = b * kReduceBlock, hi = std::min(n, lo + kReduceBlock);
            sums[b].assign(static_cast<size_t>(k) * dim, 0.0);
            cnts[b].assign(k, 0);
            for (size_t t = lo; t < hi; ++t) {
                int c = res.assignments[t];
                ++cnts[b][c];
                for (size_t d = 0; d < dim; ++d)
                    sums[b][c * dim + d] += features[t].vec[d];
            }
        };
        if (ex == Exec::Parallel) {
            long long nb = static_cast<long long>(nblocks);
#pragma omp parallel for schedule(static)
            for (long long b = 0; b < nb; ++b)
                update_block(static_cast<size_t>(b));
        } else {
            for (size_t b = 0; b < nblocks; ++b)
                update_block(b);
        }
        for (int c = 0; c < k; ++c) {
            size_t total = 0;
            std::vector<double> sum(dim, 0.0);
            for (size_t b = 0; b < nblocks; ++b) {
                total += cnts[b][c];
                for (size_t d = 0; d < dim; ++d)
                    sum[d] += sums[b][c * dim + d];
            }
            if (total > 0) // empty cluster keeps its previous centroid
                for (size_t d = 0; d < dim; ++d)
                    cent[c][d] = sum[d] / static_cast<double>(total);
        }
    }
    res.centroids = std::move(cent);
    return res;
}

MixtureModel model_from_clusters(const std::vector<TreeFeature>& features,
                                 const std::vector<int>& assignments, int k) {
    if (features.empty() || assignments.size() != features.size())
        throw ArgumentError("model_from_clusters: bad assignment vector");
    size_t dim = features[0].vec.size();
    size_t n = features.size();

    MixtureModel m;
    m.alpha.assign(k, 0.0);
    m.components.assign(k, MixtureComponent{std::vector<TwoStateGaussian>(dim)});
    std::vector<std::vector<double>> m2(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> cnt(k, 0);
    for (size_t t = 0; t < n; ++t) {
        int c = assignments[t];
        if (c < 0 || c >= k)
            throw ArgumentError("model_from_clusters: assignment out of range");
        ++cnt[c];
        for (size_t d = 0; d < dim; ++d)
            m2[c][d] += features[t].vec[d] * features[t].vec[d];
    }
    for (int c = 0; c < k; ++c) {
        m.alpha[c] = static_cast<double>(cnt[c]) / static_cast<double>(n);
        for (size_t d = 0; d < dim; ++d) {
            double v = cnt[c] ? m2[c][d] / static_cast<double>(cnt[c]) : 1.0;
            v = std::max(v, 1e-6);
            m.components[c].dims[d] = {2.0 * v, 0.5 * v, 0.5};
        }
    }
    return m;
}

double log_likelihood(const std::vector<TreeFeature>& features, const MixtureModel& model) {
    int k = static_cast<int>(model.alpha.size());
    double total = 0;
    for (const TreeFeature& f : features) {
        double acc = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (model.alpha[c] <= 0)
                continue;
            acc = log_sum_exp(acc, std::log(model.alpha[c]) +
                                       log_density(f.vec, model.components[c]));
        }
        if (acc == -std::numeric_limits<double>::infinity())
            throw NumericalUnderflow("zero total likelihood for a data point");
        total += acc;
    }
    return total;
}

MixtureModel em_step(const std::vector<TreeFeature>& features, const MixtureModel& model) {
    size_t n = features.size();
    int k = static_cast<int>(model.alpha.size());
    if (n == 0 || k == 0)
        throw ArgumentError("em_step: empty input");
    size_t dim = features[0].vec.size();

    MixtureModel out = model;
    std::vector<double> post_sum(k, 0.0);
    // accumulators for posterior-weighted moment matching
    std::vector<std::vector<double>> wh(k, std::vector<double>(dim, 0.0));  // sum post*r_h
    std::vector<std::vector<double>> xh(k, std::vector<double>(dim, 0.0));  // sum post*r_h*x^2
    std::vector<std::vector<double>> wl(k, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> xl(k, std::vector<double>(dim, 0.0));

    std::vector<double> lp(k);
    for (size_t t = 0; t < n; ++t) {
        const std::vector<double>& x = features[t].vec;
        double norm = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            lp[c] = model.alpha[c] > 0
                        ? std::log(model.alpha[c]) + log_density(x, model.components[c])
                        : -std::numeric_limits<double>::infinity();
            norm = log_sum_exp(norm, lp[c]);
        }
        if (norm == -std::numeric_limits<double>::infinity())
            throw NumericalUnderflow("zero total likelihood for a data point");
        for (int c = 0; c < k; ++c) {
            if (lp[c] == -std::numeric_limits<double>::infinity())
                continue;
            double post = std::exp(lp[c] - norm); // Bayes posterior P_c(t)
            post_sum[c] += post;
            for (size_t d = 0; d < dim; ++d) {
                const TwoStateGaussian& g = model.components[c].dims[d];
                double lh = g.p_h > 0 ? std::log(g.p_h) + log_gauss0(x[d], g.var_h)
                                      : -std::numeric_limits<double>::infinity();
                double ll = g.p_h < 1 ? std::log(1.0 - g.p_h) + log_gauss0(x[d], g.var_l)
                                      : -std::numeric_limits<double>::infinity();
                double rh = std::exp(lh - log_sum_exp(lh, ll)); // within-dim state posterior
                wh[c][d] += post * rh;
                xh[c][d] += post * rh * x[d] * x[d];
                wl[c][d] += post * (1.0 - rh);
                xl[c][d] += post * (1.0 - rh) * x[d] * x[d];
            }
        }
    }

    for (int c = 0; c < k; ++c) {
        out.alpha[c] = post_sum[c] / static_cast<double>(n);
        if (post_sum[c] <= 0)
            continue; // dead component keeps its parameters
        for (size_t d = 0; d < dim; ++d) {
            TwoStateGaussian& g = out.components[c].dims[d];
            g.p_h = wh[c][d] / post_sum[c];
            if (wh[c][d] > 0)
                g.var_h = std::max(xh[c][d] / wh[c][d], kVarFloor);
            if (wl[c][d] > 0)
                g.var_l = std::max(xl[c][d] / wl[c][d], kVarFloor);
        }
    }
    return out;
}

std::vector<int> map_assignments(const std::vector<TreeFeature>& features,
                                 const MixtureModel& model) {
    int k = static_cast<int>(model.alpha.size());
    std::vector<int> out(features.size(), 0);
    for (size_t t = 0; t < features.size(); ++t) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int c = 0; c < k; ++c) {
            if (model.alpha[c] <= 0)
                continue;
            double lp = std::log(model.alpha[c]) +
                        log_density(features[t].vec, model.components[c]);
            if (lp > best) {
                best = lp;
                arg = c;
            }
        }
        out[t] = arg;
    }
    return out;
}

std::vector<ClusterStat> cluster_stats(const WaveletPyramid& pyr,
                                       const std::vector<int>& assignments, int k,
                                       const ClusterScoreFn& score) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    Shape s{pyr.width, pyr.height, pyr.levels};
    std::vector<Coord> roots = tree_roots(s);
    if (assignments.size() != roots.size())
        throw ArgumentError("cluster_stats: assignment count != tree count");

    std::vector<std::map<long long, size_t>> hist(k);
    std::vector<size_t> total(k, 0), nonzero(k, 0), members(k, 0);
    for (size_t t = 0; t < roots.size(); ++t) {
        int c = assignments[t];
        if (c < 0 || c >= k)
            throw ArgumentError("cluster_stats: assignment out of range");
        ++members[c];
        for_each_descendant(s, roots[t], [&](Coord co) {
            long long mag = std::llabs(std::llround(pyr.at(co.i, co.j)));
            ++hist[c][mag];
            ++total[c];
            if (mag != 0)
                ++nonzero[c];
        });
    }

    std::vector<ClusterStat> out(k);
    for (int c = 0; c < k; ++c) {
        ClusterStat& st = out[c];
        st.cluster_id = c;
        st.size = members[c];
        st.nonzero_count = nonzero[c];
        st.empty = members[c] == 0;
        if (!st.empty && total[c] > 0) {
            double h = 0;
            double nn = static_cast<double>(total[c]);
            for (const auto& [mag, cnt] : hist[c]) {
                double p = static_cast<double>(cnt) / nn;
                h -= p * std::log2(p);
            }
            st.entropy_bits = h;
        }
        st.score = score ? score(st.entropy_bits, st.nonzero_count)
                         : st.entropy_bits * static_cast<double>(st.nonzero_count);
    }
    return out;
}

WeightMap importance_weights(const WaveletPyramid& pyr, const std::vector<int>& assignments,
                             const std::vector<double>& cluster_scores, size_t m,
                             double lambda) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    if (lambda < 0)
        throw ArgumentError("importance_weights: lambda must be >= 0");
    Shape s{pyr.width, pyr.height, pyr.levels};
    size_t n = pyr.coeffs.size();
    if (m > n)
        throw ArgumentError("importance_weights: m exceeds coefficient count");

    std::vector<Coord> roots = tree_roots(s);
    if (assignments.size() != roots.size())
        throw ArgumentError("importance_weights: assignment count != tree count");

    double max_score = 0;
    for (double v : cluster_scores)
        max_score = std::max(max_score, v);

    // relevance per coefficient: normalized cluster score of its tree; the LL
    // band always ranks at the top
    std::vector<double> gamma(n, 0.0);
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j)
            gamma[s.idx({i, j})] = 1.0;
    for (size_t t = 0; t < roots.size(); ++t) {
        int c = assignments[t];
        if (c < 0 || static_cast<size_t>(c) >= cluster_scores.size())
            throw ArgumentError("importance_weights: assignment out of range");
        double g = max_score > 0 ? cluster_scores[c] / max_score : 0.0;
        for_each_descendant(s, roots[t], [&](Coord co) { gamma[s.idx(co)] = g; });
    }

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (gamma[a] != gamma[b])
            return gamma[a] > gamma[b];
        double ma = std::fabs(pyr.coeffs[a]), mb = std::fabs(pyr.coeffs[b]);
        if (ma != mb)
            return ma > mb;
        return a < b;
    });

    WeightMap wm;
    wm.width = s.w;
    wm.height = s.h;
    wm.w.assign(n, 0.0);
    for (size_t r = 0; r < m; ++r) {
        size_t t = order[r];
        wm.w[t] = std::max(1.0, -1.0 + lambda * gamma[t]);
    }
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j) {
            double& x = wm.w[s.idx({i, j})];
            if (x == 0.0)
                x = 1.0;
        }
    return wm;
}

WaveletPyramid rescale(const WaveletPyramid& pyr, const WeightMap& weights, int scale_shift) {
    if (weights.width != pyr.width || weights.height != pyr.height)
        throw ShapeError("rescale: weight map size mismatch");
    if (scale_shift < 0)
        throw ArgumentError("rescale: scale_shift must be >= 0");
    WaveletPyramid out = pyr;
    for (size_t t = 0; t < out.coeffs.size(); ++t) {
        double w = weights.w[t];
        if (w == 0.0)
            out.coeffs[t] = 0.0;
        else if (w > 1.0)
            out.coeffs[t] = std::ldexp(out.coeffs[t], scale_shift);
    }
    return out;
}

WaveletPyramid unscale(const WaveletPyramid& pyr, const WeightMap& weights, int scale_shift) {
    if (weights.width != pyr.width || weights.height != pyr.height)
        throw ShapeError("unscale: weight map size mismatch");
    if (scale_shift < 0)
        throw ArgumentError("unscale: scale_shift must be >= 0");
    WaveletPyramid out = pyr;
    for (size_t t = 0; t < out.coeffs.size(); ++t) {
        double w = weights.w[t];
        if (w == 0.0)
            out.coeffs[t] = 0.0;
        else if (w > 1.0)
            out.coeffs[t] = std::ldexp(out.coeffs[t], -scale_shift);
    }
    return out;
}

WeightMap crossband_mask(const WaveletPyramid& pyr, int u0, MaskPolicy policy) {
    check_pyramid_dims(pyr.width, pyr.height, pyr.levels);
    if (u0 < 0)
        throw ArgumentError("crossband_mask: u0 must be >= 0");
    Shape s{pyr.width, pyr.height, pyr.levels};

    double max_ll = 0;
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j)
            max_ll = std::max(max_ll, std::fabs(pyr.at(i, j)));
    double T;
    if (max_ll == 0.0)
        T = std::numeric_limits<double>::infinity(); // nothing to correlate with
    else
        T = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(max_ll))) - u0);

    WeightMap wm;
    wm.width = s.w;
    wm.height = s.h;
    wm.w.assign(pyr.coeffs.size(), 0.0);
    for (int i = 0; i < s.ll_h(); ++i)
        for (int j = 0; j < s.ll_w(); ++j)
            wm.at(i, j) = 1.0;

    for (int l = 1; l <= s.L; ++l) {
        int hw = s.w >> l, hh = s.h >> l;
        for (int i = 0; i < hh; ++i)
            for (int j = 0; j < hw; ++j) {
                bool lh = std::fabs(pyr.at(hh + i, j)) >= T;
                bool hl = std::fabs(pyr.at(i, hw + j)) >= T;
                bool hhb = std::fabs(pyr.at(hh + i, hw + j)) >= T;
                bool keep = policy == MaskPolicy::All ? (lh && hl && hhb)
                                                      : (lh || hl || hhb);
                if (keep) {
                    wm.at(hh + i, j) = 1.0;
                    wm.at(i, hw + j) = 1.0;
                    wm.at(hh + i, hw + j) = 1.0;
                }
            }
    }
    return wm;
}

} // namespace rms
