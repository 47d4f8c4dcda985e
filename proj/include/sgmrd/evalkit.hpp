#pragma once

#include "sgmrd/engine.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sgmrd {

// ---- subspace monitoring ----

struct MonitorStep {
    std::uint64_t t = 0;
    std::vector<double> qualities;       // Q_t(s_i)
    std::vector<std::size_t> selected;   // I_t
    std::vector<bool> successes;         // A_t and B_t, aligned with selected
};

struct MonitorLog {
    std::size_t dims = 0;
    std::vector<MonitorStep> steps;

    static MonitorLog from_snapshots(std::span<const Snapshot> snapshots);
    void validate() const;
};

struct Regret {
    double total = 0.0;     // R_T
    double per_step = 0.0;  // R_T / T
};

// R_T = 1/d * sum_t sum_i (Q*_t(s_i) - Q_t(s_i)); both logs must cover the same steps.
Regret regret(const MonitorLog& log, const MonitorLog& gold);

struct AverageQuality {
    std::vector<double> per_step;  // mean over dimensions at each step
    double overall = 0.0;          // mean of per_step
};

AverageQuality average_quality(const MonitorLog& log);

// Fraction of steps at which each dimension was selected.
std::vector<double> update_frequency(const MonitorLog& log);

struct SuccessRate {
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::optional<double> per_attempt;   // successes / attempts; empty when nothing was attempted
    std::optional<double> per_dim_step;  // successes / (d * T)
};

SuccessRate success_rate(const MonitorLog& log);

// ---- outlier ranking ----

// Rank-based AUC (Mann-Whitney), ties count one half. Needs both classes.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

// Mean over positives of the precision at their rank; ties keep input order.
double average_precision(std::span<const double> scores, const std::vector<bool>& labels);

struct PrecisionRecall {
    double percent = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Precision and recall within the top ceil(percent/100 * n) scores.
PrecisionRecall precision_recall_at(std::span<const double> scores, const std::vector<bool>& labels,
                                    double percent);

inline constexpr std::array<double, 3> kTopPercents = {1.0, 2.0, 5.0};

struct RankingMetrics {
    double auc = 0.0;
    double ap = 0.0;
    std::array<PrecisionRecall, 3> top{};  // at 1%, 2%, 5%
};

RankingMetrics ranking_metrics(std::span<const double> scores, const std::vector<bool>& labels);

}  // namespace sgmrd
