#pragma once

#include "sgmrd/rng.hpp"
#include "sgmrd/stream.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sgmrd {

struct EstimatorConfig {
    std::size_t iterations = 100;  // Monte-Carlo iterations M
    double slice_mass = 0.5;       // expected fraction of the window inside a condition
    std::uint64_t seed = 0;

    void validate() const;
};

// One Monte-Carlo estimate of the dependency of `target_dim` on the rest of `subspace`.
struct QualityEstimate {
    double value = 0.0;  // in [0, 1]
    Subspace subspace;
    std::size_t target_dim = 0;
    std::size_t iterations = 0;
    bool degenerate = false;  // target column constant on the window
};

// Cumulative number of contrast evaluations. Shared by concurrent searches.
class EvaluationCounter {
public:
    void add(std::uint64_t n = 1) noexcept { count_.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t value() const noexcept { return count_.load(std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> count_{0};
};

// Two-sample Kolmogorov-Smirnov statistic sup|F_a - F_b| of two ascending samples.
double ks_statistic(std::span<const double> sample_a, std::span<const double> sample_b);

// Asymptotic p-value for statistic `d` between samples of sizes na and nb.
double ks_pvalue(double d, std::size_t na, std::size_t nb);

// p-value of the two-sample KS test. Both samples must be sorted ascending and non-empty.
double ks_two_sample_pvalue(std::span<const double> sample_a, std::span<const double> sample_b);

struct Condition {
    std::vector<std::uint32_t> inside;   // buffer positions, ascending
    std::vector<std::uint32_t> outside;  // buffer positions, ascending
};

// Number of consecutive ranks kept per conditioning dimension.
std::size_t slice_width(std::size_t window_size, std::size_t subspace_size, double slice_mass);

// Restricts every dimension of `subspace` except `target_dim` to a random
// contiguous block of ranks and splits the window into the rows that satisfy
// all restrictions and the rest. `inside` may be empty.
Condition random_condition(const SlidingWindow& window, const Subspace& subspace,
                           std::size_t target_dim, SplitMix64& rng, double slice_mass);

// Monte-Carlo contrast: 1 - mean KS p-value between target values inside and
// outside M random conditions. Deterministic given window contents and cfg.seed.
QualityEstimate contrast(const SlidingWindow& window, const Subspace& subspace,
                         std::size_t target_dim, const EstimatorConfig& cfg,
                         EvaluationCounter* counter = nullptr);

// Maximum number of redraws when a condition leaves one side empty.
inline constexpr int kMaxConditionRedraws = 10;

}  // namespace sgmrd
