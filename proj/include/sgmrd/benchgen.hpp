#pragma once

#include "sgmrd/rng.hpp"
#include "sgmrd/stream.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sgmrd {

struct GeneratorConfig {
    std::size_t dims = 10;
    std::size_t phases = 10;          // n: distributions the stream drifts through
    std::size_t per_phase = 1000;     // e: observations emitted per distribution
    double outlier_prob = 0.009;      // target probability that a point is an outlier
    std::size_t max_subspace_dim = 5;
    double delta_min = 0.6;           // outlier corner offset drawn from [delta_min, delta_max]
    double delta_max = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
    // Planted subspaces per distribution: max(1, d / max_subspace_dim).
    std::size_t subspaces_per_distribution() const;
    // Per-subspace outlier probability q with 1 - (1 - q)^K = outlier_prob.
    double per_subspace_prob() const;
};

struct PlantedSubspace {
    Subspace dims;
    double delta = 0.0;  // outliers live in [delta, 1]^|dims|, inliers in the rest of the cube
};

// One distribution of the drift sequence; index 0 is uniform with no subspaces.
struct DistributionSpec {
    std::vector<PlantedSubspace> subspaces;
};

struct GeneratedStream {
    std::vector<Observation> observations;   // labelled, time_index from 1
    std::vector<DistributionSpec> distributions;  // phases + 1 entries
    std::vector<std::uint32_t> source;       // distribution each observation was drawn from
};

// Drifting benchmark stream. Phase i emits per_phase points, the j-th drawn
// from distribution i+1 with probability j/per_phase and from i otherwise.
// Consecutive distributions share half of their planted subspaces (the
// replaced count rounds up).
GeneratedStream generate(const GeneratorConfig& cfg);

// Uniform point of [0,1]^m outside the corner [delta,1]^m, by rejection.
std::vector<double> complement_sample(double delta, std::size_t m, SplitMix64& rng);

void write_dataset_csv(const std::filesystem::path& path, const GeneratedStream& data);
std::string spec_json(const GeneratorConfig& cfg, const GeneratedStream& data);

}  // namespace sgmrd
