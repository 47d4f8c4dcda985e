#pragma once

#include "sgmrd/estimator.hpp"
#include "sgmrd/stream.hpp"

#include <cstddef>
#include <cstdint>

namespace sgmrd {

struct SearchResult {
    Subspace subspace;
    double quality = 0.0;
    std::uint64_t evaluations = 0;
};

// Bottom-up greedy search for a subspace around `target_dim`.
//
// Scores every 2-d subspace {target, j}, starts from the best one, then tries
// the remaining dimensions in descending order of their 2-d score and keeps a
// dimension only if the grown subspace scores strictly higher than the current
// one. Costs exactly 2d - 3 contrast evaluations. Ties go to the lowest index.
//
// Evaluation k draws its Monte-Carlo seed from (cfg.seed, k), so the result is
// deterministic given the window and cfg.seed.
SearchResult greedy_search(const SlidingWindow& window, std::size_t target_dim,
                           const EstimatorConfig& cfg, EvaluationCounter* counter = nullptr);

}  // namespace sgmrd
