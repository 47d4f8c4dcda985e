#pragma once

#include "sgmrd/stream.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sgmrd {

// Added to the mean reachability distance before inverting it, so duplicated
// points get a huge but finite density and a cluster of identical points
// scores exactly 1.
inline constexpr double kLofDensityEpsilon = 1e-10;

// Local Outlier Factor of every row of `points` (Euclidean metric).
// Neighbourhoods contain every point tied at the k-distance. Requires rows > k >= 1.
std::vector<double> lof(const Matrix& points, std::size_t k);

// LOF for several k at once, sharing the neighbour search. result[j] belongs to ks[j].
std::vector<std::vector<double>> lof_multi(const Matrix& points, std::span<const std::size_t> ks);

}  // namespace sgmrd
