#include "sgmrd/estimator.hpp"

#include "sgmrd/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace sgmrd {

void EstimatorConfig::validate() const {
    if (iterations < 1) throw ConfigError("estimator needs at least one iteration");
    if (!(slice_mass > 0.0 && slice_mass < 1.0)) {
        throw ConfigError("slice mass must lie in (0, 1), got " + std::to_string(slice_mass));
    }
}

namespace {

// |i * nb - j * na| over all merge points; the statistic is this over na * nb.
std::uint64_t scaled_gap(std::uint64_t i, std::uint64_t j, std::uint64_t na, std::uint64_t nb) {
    const std::uint64_t x = i * nb;
    const std::uint64_t y = j * na;
    return x > y ? x - y : y - x;
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("KS test needs two non-empty samples");
    const std::uint64_t na = a.size();
    const std::uint64_t nb = b.size();
    std::uint64_t i = 0, j = 0, best = 0;
    while (i < na && j < nb) {
        const double v = std::min(a[i], b[j]);
        while (i < na && a[i] == v) ++i;
        while (j < nb && b[j] == v) ++j;
        best = std::max(best, scaled_gap(i, j, na, nb));
    }
    // Once one sample is exhausted the gap only shrinks toward zero.
    return static_cast<double>(best) / (static_cast<double>(na) * static_cast<double>(nb));
}

double ks_pvalue(double d, std::size_t na, std::size_t nb) {
    if (na == 0 || nb == 0) throw DataError("KS test needs two non-empty samples");
    if (d <= 0.0) return 1.0;
    const double ne = static_cast<double>(na) * static_cast<double>(nb) /
                      static_cast<double>(na + nb);
    const double lambda2 = ne * d * d;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k < 100000; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda2);
        sum += sign * term;
        if (term < 1e-10) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_two_sample_pvalue(std::span<const double> a, std::span<const double> b) {
    return ks_pvalue(ks_statistic(a, b), a.size(), b.size());
}

std::size_t slice_width(std::size_t window_size, std::size_t subspace_size, double slice_mass) {
    if (subspace_size < 2) throw ShapeError("a condition needs at least two dimensions");
    const double fraction =
        std::pow(slice_mass, 1.0 / static_cast<double>(subspace_size - 1));
    const auto width = static_cast<std::size_t>(std::ceil(static_cast<double>(window_size) * fraction));
    return std::clamp<std::size_t>(width, 1, window_size);
}

namespace {

void check_contrast_args(const SlidingWindow& window, const Subspace& subspace,
                         std::size_t target_dim) {
    if (subspace.size() < 2) {
        throw ShapeError("subspace " + subspace.to_string() +
                         " has no conditioning dimension besides the target");
    }
    if (subspace.max_dim() >= window.dims()) {
        throw IndexError("subspace " + subspace.to_string() + " out of range for d=" +
                         std::to_string(window.dims()));
    }
    if (!subspace.contains(target_dim)) {
        throw ShapeError("target dimension " + std::to_string(target_dim) +
                         " is not in subspace " + subspace.to_string());
    }
}

}  // namespace

Condition random_condition(const SlidingWindow& window, const Subspace& subspace,
                           std::size_t target_dim, SplitMix64& rng, double slice_mass) {
    check_contrast_args(window, subspace, target_dim);
    if (window.empty()) throw DataError("cannot condition on an empty window");

    const std::size_t n = window.size();
    const std::size_t width = slice_width(n, subspace.size(), slice_mass);

    std::vector<std::uint8_t> keep(n, 1);
    for (auto dim : subspace.dims()) {
        if (dim == target_dim) continue;
        const auto offset = rng.below(n - width + 1);
        const auto ranks = window.ranks(dim);
        for (std::size_t pos = 0; pos < n; ++pos) {
            if (ranks[pos] - offset >= width) keep[pos] = 0;
        }
    }

    Condition c;
    for (std::size_t pos = 0; pos < n; ++pos) {
        (keep[pos] ? c.inside : c.outside).push_back(static_cast<std::uint32_t>(pos));
    }
    return c;
}

namespace {

constexpr std::size_t kLanes = 8;

// Target positions are split into eight consecutive segments, one per lane,
// and stored interleaved: position k lives at slot (k % stride) * 8 + k / stride.
struct TargetLayout {
    std::size_t n = 0;
    std::size_t stride = 0;
    std::array<std::uint32_t, kLanes> lane_length{};
    bool has_ties = false;
    std::vector<std::uint8_t> boundary;  // per slot: 1 where a run of equal values ends

    std::size_t slots() const { return stride * kLanes; }
    std::size_t slot(std::size_t k) const { return (k % stride) * kLanes + k / stride; }
};

TargetLayout make_layout(std::span<const SlidingWindow::RankEntry> sorted_target) {
    TargetLayout t;
    t.n = sorted_target.size();
    t.stride = (t.n + kLanes - 1) / kLanes;
    for (std::size_t i = 0; i < kLanes; ++i) {
        const std::size_t begin = std::min(t.n, i * t.stride);
        const std::size_t end = std::min(t.n, (i + 1) * t.stride);
        t.lane_length[i] = static_cast<std::uint32_t>(end - begin);
    }
    t.boundary.assign(t.slots(), 0);
    for (std::size_t k = 0; k < t.n; ++k) {
        const bool ends_run = k + 1 == t.n || sorted_target[k].value != sorted_target[k + 1].value;
        t.boundary[t.slot(k)] = ends_run;
        t.has_ties = t.has_ties || !ends_run;
    }
    return t;
}

double scaled_to_pvalue(std::uint64_t best, std::size_t na, std::size_t n) {
    const double d = static_cast<double>(best) /
                     (static_cast<double>(na) * static_cast<double>(n - na));
    return ks_pvalue(d, na, n - na);
}

// Extremes of gap(k) = c_in(k) * n - (k + 1) * na over the run boundaries,
// where c_in(k) counts inside rows among the k + 1 smallest target values.
struct GapRange {
    std::int64_t hi = 0;
    std::int64_t lo = 0;
};

// Joins per-lane extremes using the running totals of the lanes before.
template <typename T>
GapRange combine_lanes(const T* hi, const T* lo, const T* total, const TargetLayout& layout,
                       T unset_hi) {
    GapRange g;
    std::int64_t offset = 0;
    for (std::size_t i = 0; i < kLanes; ++i) {
        if (layout.lane_length[i] == 0) continue;
        if (hi[i] != unset_hi) {
            g.hi = std::max(g.hi, offset + static_cast<std::int64_t>(hi[i]));
            g.lo = std::min(g.lo, offset + static_cast<std::int64_t>(lo[i]));
        }
        offset += static_cast<std::int64_t>(total[i]);
    }
    return g;
}

GapRange gap_range_scalar(const std::uint8_t* inside, const TargetLayout& layout, std::int64_t na) {
    const auto ni = static_cast<std::int64_t>(layout.n);
    constexpr auto unset_hi = std::numeric_limits<std::int64_t>::min();
    std::array<std::int64_t, kLanes> hi, lo, total;
    hi.fill(unset_hi);
    lo.fill(std::numeric_limits<std::int64_t>::max());
    total.fill(0);
    for (std::size_t i = 0; i < kLanes; ++i) {
        std::int64_t run = 0;
        for (std::size_t t = 0; t < layout.lane_length[i]; ++t) {
            const std::size_t s = t * kLanes + i;
            run += (inside[s] ? ni : 0) - na;
            if (!layout.boundary[s]) continue;
            hi[i] = std::max(hi[i], run);
            lo[i] = std::min(lo[i], run);
        }
        total[i] = run;
    }
    return combine_lanes(hi.data(), lo.data(), total.data(), layout, unset_hi);
}

#if defined(__AVX2__)
// Eight lanes walk their segments side by side; needs n * n to fit in 32 bits.
template <bool Ties>
GapRange gap_range_avx2(const std::uint8_t* inside, const TargetLayout& layout, std::int64_t na) {
    const __m256i n_vec = _mm256_set1_epi32(static_cast<int>(layout.n));
    const __m256i na_vec = _mm256_set1_epi32(static_cast<int>(na));
    const __m256i zero = _mm256_setzero_si256();
    constexpr int unset_hi = std::numeric_limits<std::int32_t>::min();
    __m256i hi = _mm256_set1_epi32(unset_hi);
    __m256i lo = _mm256_set1_epi32(std::numeric_limits<std::int32_t>::max());
    __m256i run = zero;

    auto advance = [&](std::size_t t) {
        const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(inside + t * kLanes));
        return _mm256_sub_epi32(_mm256_and_si256(_mm256_cvtepi8_epi32(bytes), n_vec), na_vec);
    };
    auto track = [&](std::size_t t) {
        if constexpr (Ties) {
            const __m128i ends = _mm_loadl_epi64(
                reinterpret_cast<const __m128i*>(layout.boundary.data() + t * kLanes));
            const __m256i at = _mm256_cmpgt_epi32(_mm256_cvtepu8_epi32(ends), zero);
            hi = _mm256_blendv_epi8(hi, _mm256_max_epi32(hi, run), at);
            lo = _mm256_blendv_epi8(lo, _mm256_min_epi32(lo, run), at);
        } else {
            hi = _mm256_max_epi32(hi, run);
            lo = _mm256_min_epi32(lo, run);
        }
    };

    const std::size_t full = *std::min_element(layout.lane_length.begin(), layout.lane_length.end());
    std::size_t t = 0;
    for (; t < full; ++t) {
        run = _mm256_add_epi32(run, advance(t));
        track(t);
    }
    const __m256i length = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(layout.lane_length.data()));
    for (; t < layout.stride; ++t) {
        const __m256i valid = _mm256_cmpgt_epi32(length, _mm256_set1_epi32(static_cast<int>(t)));
        run = _mm256_add_epi32(run, _mm256_and_si256(advance(t), valid));
        track(t);
    }

    alignas(32) std::int32_t his[kLanes], los[kLanes], totals[kLanes];
    _mm256_store_si256(reinterpret_cast<__m256i*>(his), hi);
    _mm256_store_si256(reinterpret_cast<__m256i*>(los), lo);
    _mm256_store_si256(reinterpret_cast<__m256i*>(totals), run);
    return combine_lanes(his, los, totals, layout, unset_hi);
}
#endif

GapRange gap_range(const std::uint8_t* inside, const TargetLayout& layout, std::int64_t na) {
#if defined(__AVX2__)
    if (layout.n <= 46340) {
        return layout.has_ties ? gap_range_avx2<true>(inside, layout, na)
                               : gap_range_avx2<false>(inside, layout, na);
    }
#endif
    return gap_range_scalar(inside, layout, na);
}

std::size_t count_inside(const std::uint8_t* inside, std::size_t slots) {
    std::size_t count = 0;
    std::size_t s = 0;
#if defined(__AVX2__)
    __m256i acc = _mm256_setzero_si256();
    for (; s + 32 <= slots; s += 32) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(inside + s));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(v, _mm256_setzero_si256()));
    }
    alignas(32) std::uint64_t parts[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(parts), acc);
    count = static_cast<std::size_t>(parts[0] + parts[1] + parts[2] + parts[3]);
#endif
    count /= 0xFF;
    for (; s < slots; ++s) count += inside[s] != 0;
    return count;
}

// One conditioning dimension: the inside set is a contiguous run of that
// dimension's ranks, so moving from one offset to the next flips two rows.
// to_slot[r] is the slot of the row with conditioning rank r.
double sum_pvalues_single_condition(const TargetLayout& layout,
                                    std::span<const std::uint32_t> to_slot, std::size_t width,
                                    const EstimatorConfig& cfg) {
    const std::size_t n = layout.n;
    if (width >= n) return static_cast<double>(cfg.iterations);  // outside always empty

    std::vector<std::uint32_t> drawn(cfg.iterations);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        SplitMix64 rng(derive_seed(cfg.seed, it));
        drawn[it] = static_cast<std::uint32_t>(rng.below(n - width + 1));
    }
    std::vector<std::uint32_t> needed = drawn;
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

    std::vector<std::uint8_t> inside(layout.slots(), 0);
    for (std::size_t r = needed.front(); r < needed.front() + width; ++r) inside[to_slot[r]] = 0xFF;
    std::vector<double> pvalue_at(needed.size());
    std::uint32_t offset = needed.front();
    for (std::size_t q = 0; q < needed.size(); ++q) {
        for (; offset < needed[q]; ++offset) {
            inside[to_slot[offset]] = 0;
            inside[to_slot[offset + width]] = 0xFF;
        }
        const auto g = gap_range(inside.data(), layout, static_cast<std::int64_t>(width));
        pvalue_at[q] = scaled_to_pvalue(static_cast<std::uint64_t>(std::max(g.hi, -g.lo)), width, n);
    }

    double sum = 0.0;
    for (auto o : drawn) {
        const auto q = std::lower_bound(needed.begin(), needed.end(), o) - needed.begin();
        sum += pvalue_at[static_cast<std::size_t>(q)];
    }
    return sum;
}

// Several conditioning dimensions: intersect the blocks per iteration.
// Inside slots are marked 0xFF.
// cond_rank[j * slots + s] is the rank in conditioning dimension j of the
// row at slot s; padding slots hold a rank no block can reach.
template <typename Rank>
double sum_pvalues_intersection(const TargetLayout& layout, const std::vector<Rank>& cond_rank,
                                std::size_t m, std::size_t width, const EstimatorConfig& cfg) {
    const std::size_t n = layout.n;
    const std::size_t slots = layout.slots();
    std::vector<std::uint8_t> inside(slots);
    std::vector<Rank> offsets(m);
    const auto w = static_cast<Rank>(width);
    double p_sum = 0.0;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        SplitMix64 rng(derive_seed(cfg.seed, it));
        std::size_t n_in = 0;
        bool drawn = false;
        for (int attempt = 0; attempt <= kMaxConditionRedraws && !drawn; ++attempt) {
            for (std::size_t j = 0; j < m; ++j) {
                offsets[j] = static_cast<Rank>(rng.below(n - width + 1));
            }
            std::uint8_t* in = inside.data();
            {
                const Rank* r = cond_rank.data();
                const Rank o = offsets[0];
                for (std::size_t s = 0; s < slots; ++s) in[s] = -static_cast<std::uint8_t>(static_cast<Rank>(r[s] - o) < w);
            }
            for (std::size_t j = 1; j < m; ++j) {
                const Rank* r = cond_rank.data() + j * slots;
                const Rank o = offsets[j];
                for (std::size_t s = 0; s < slots; ++s) in[s] &= -static_cast<std::uint8_t>(static_cast<Rank>(r[s] - o) < w);
            }
            n_in = count_inside(in, slots);
            drawn = n_in > 0 && n_in < n;
        }
        if (!drawn) {
            p_sum += 1.0;
            continue;
        }
        const auto g = gap_range(inside.data(), layout, static_cast<std::int64_t>(n_in));
        p_sum += scaled_to_pvalue(static_cast<std::uint64_t>(std::max(g.hi, -g.lo)), n_in, n);
    }
    return p_sum;
}

template <typename Rank>
std::vector<Rank> ranks_by_slot(const SlidingWindow& window, const TargetLayout& layout,
                                const std::vector<std::size_t>& cond_dims, std::size_t target_dim) {
    const std::size_t slots = layout.slots();
    const auto order = window.rank_index(target_dim);
    std::vector<Rank> out(cond_dims.size() * slots, std::numeric_limits<Rank>::max());
    for (std::size_t j = 0; j < cond_dims.size(); ++j) {
        const auto ranks = window.ranks(cond_dims[j]);
        Rank* dst = out.data() + j * slots;
        for (std::size_t k = 0; k < layout.n; ++k) {
            dst[layout.slot(k)] = static_cast<Rank>(ranks[order[k]]);
        }
    }
    return out;
}

}  // namespace

QualityEstimate contrast(const SlidingWindow& window, const Subspace& subspace,
                         std::size_t target_dim, const EstimatorConfig& cfg,
                         EvaluationCounter* counter) {
    check_contrast_args(window, subspace, target_dim);
    cfg.validate();
    if (window.size() < 2) throw DataError("contrast needs at least two observations");
    if (counter) counter->add();

    QualityEstimate est{0.0, subspace, target_dim, cfg.iterations, false};

    const auto sorted_target = window.sorted(target_dim);
    if (sorted_target.front().value == sorted_target.back().value) {
        est.degenerate = true;
        return est;
    }

    const std::size_t n = window.size();
    const std::size_t width = slice_width(n, subspace.size(), cfg.slice_mass);
    std::vector<std::size_t> cond_dims;
    for (auto dim : subspace.dims()) {
        if (dim != target_dim) cond_dims.push_back(dim);
    }
    const std::size_t m = cond_dims.size();
    const auto layout = make_layout(sorted_target);

    double p_sum = 0.0;
    if (m == 1) {
        const auto target_rank = window.ranks(target_dim);
        const auto order = window.rank_index(cond_dims[0]);
        std::vector<std::uint32_t> to_slot(n);
        for (std::size_t r = 0; r < n; ++r) {
            to_slot[r] = static_cast<std::uint32_t>(layout.slot(target_rank[order[r]]));
        }
        p_sum = sum_pvalues_single_condition(layout, to_slot, width, cfg);
    } else if (n < 0x8000) {
        // Padding rank 0xFFFF minus any offset stays at least the width.
        const auto ranks = ranks_by_slot<std::uint16_t>(window, layout, cond_dims, target_dim);
        p_sum = sum_pvalues_intersection(layout, ranks, m, width, cfg);
    } else {
        const auto ranks = ranks_by_slot<std::uint32_t>(window, layout, cond_dims, target_dim);
        p_sum = sum_pvalues_intersection(layout, ranks, m, width, cfg);
    }
    est.value = std::clamp(1.0 - p_sum / static_cast<double>(cfg.iterations), 0.0, 1.0);
    return est;
}

}  // namespace sgmrd
