#include "sgmrd/search.hpp"

#include "sgmrd/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace sgmrd {

SearchResult greedy_search(const SlidingWindow& window, std::size_t target_dim,
                           const EstimatorConfig& cfg, EvaluationCounter* counter) {
    const std::size_t d = window.dims();
    if (d < 2) throw ShapeError("search needs at least two dimensions");
    if (target_dim >= d) {
        throw IndexError("target dimension " + std::to_string(target_dim) +
                         " out of range for d=" + std::to_string(d));
    }
    if (window.empty()) throw DataError("search on an empty window");

    std::uint64_t evals = 0;
    auto evaluate = [&](const Subspace& s) {
        EstimatorConfig c = cfg;
        c.seed = derive_seed(cfg.seed, evals++);
        return contrast(window, s, target_dim, c, counter).value;
    };

    std::vector<std::size_t> candidates;
    std::vector<double> pair_quality(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (j == target_dim) continue;
        candidates.push_back(j);
        pair_quality[j] = evaluate(Subspace{target_dim, j});
    }
    // Descending quality, lowest index first on ties.
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return pair_quality[a] > pair_quality[b];
    });

    Subspace best{target_dim, candidates.front()};
    double best_quality = pair_quality[candidates.front()];
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        Subspace grown = best.with(candidates[k]);
        const double q = evaluate(grown);
        if (q > best_quality) {
            best = std::move(grown);
            best_quality = q;
        }
    }
    return {std::move(best), best_quality, evals};
}

}  // namespace sgmrd
