#pragma once

#include "sgmrd/engine.hpp"
#include "sgmrd/evalkit.hpp"
#include "sgmrd/stream.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sgmrd {

struct ScoreRecord {
    std::uint64_t time_index = 0;
    double score = 0.0;               // mean LOF over every (window, subspace) evaluation
    std::uint64_t contributions = 0;  // number of LOF values averaged
    std::optional<bool> label;
};

struct ScoringConfig {
    std::size_t window_size = 1000;
    std::size_t eval_every = 100;
    std::vector<std::size_t> ks{10};
    std::size_t threads = 1;
};

inline const std::vector<std::size_t> kDefaultKGrid = {1, 2, 5, 10, 20, 50, 100};

// One score table per k, in the order of ScoringConfig::ks.
struct ScoreTable {
    std::vector<std::size_t> ks;
    std::vector<std::vector<ScoreRecord>> records;
};

// Maps a time index t >= w to the subspaces monitored at t.
using SubspaceSource = std::function<const SubspaceMap&(std::uint64_t t)>;

// Ensemble LOF over a stream. At t = w and every eval_every steps after it
// (plus the last step, so every observation is covered) the window ending at
// t is projected onto each of the d current subspaces and scored with LOF.
// Every observation's score is the mean of all LOF values it received.
ScoreTable score_stream(std::span<const Observation> stream, const SubspaceSource& subspaces_at,
                        const ScoringConfig& cfg);

// Same, taking the subspaces from engine snapshots (one per t from w to n).
ScoreTable score_stream(std::span<const Observation> stream, std::span<const Snapshot> snapshots,
                        const ScoringConfig& cfg);

// Baseline: LOF on the full space at every evaluation.
ScoreTable score_stream_full_space(std::span<const Observation> stream, const ScoringConfig& cfg);

struct KResult {
    std::size_t k = 0;
    RankingMetrics metrics;
};

struct SweepResult {
    std::size_t best_k = 0;
    std::vector<KResult> per_k;
    std::vector<ScoreRecord> best_scores;
};

// Picks the k with the highest AUC (smallest k on ties). Needs labels.
SweepResult best_k_sweep(const ScoreTable& table);

std::vector<double> scores_of(std::span<const ScoreRecord> records);
std::vector<bool> labels_of(std::span<const ScoreRecord> records);

}  // namespace sgmrd
