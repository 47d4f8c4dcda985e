#include "sgmrd/evalkit.hpp"

#include "sgmrd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sgmrd {

MonitorLog MonitorLog::from_snapshots(std::span<const Snapshot> snapshots) {
    MonitorLog log;
    if (!snapshots.empty()) log.dims = snapshots.front().qualities.size();
    log.steps.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        log.steps.push_back({s.t, s.qualities, s.selected, s.successes});
    }
    log.validate();
    return log;
}

void MonitorLog::validate() const {
    for (const auto& step : steps) {
        if (step.qualities.size() != dims) {
            throw ShapeError("monitor log step t=" + std::to_string(step.t) + " has " +
                             std::to_string(step.qualities.size()) + " qualities, expected " +
                             std::to_string(dims));
        }
        if (step.successes.size() != step.selected.size()) {
            throw ShapeError("monitor log step t=" + std::to_string(step.t) +
                             " has success flags for unselected dimensions");
        }
        for (auto i : step.selected) {
            if (i >= dims) throw IndexError("monitor log selects dimension " + std::to_string(i));
        }
    }
}

Regret regret(const MonitorLog& log, const MonitorLog& gold) {
    log.validate();
    gold.validate();
    if (gold.steps.size() != log.steps.size() || gold.dims != log.dims) {
        throw DataError("gold log does not cover the same steps as the monitor log");
    }
    if (log.dims == 0) throw DataError("empty monitor log");
    double sum = 0.0;
    for (std::size_t s = 0; s < log.steps.size(); ++s) {
        if (log.steps[s].t != gold.steps[s].t) {
            throw DataError("gold log is missing step t=" + std::to_string(log.steps[s].t));
        }
        for (std::size_t i = 0; i < log.dims; ++i) {
            sum += gold.steps[s].qualities[i] - log.steps[s].qualities[i];
        }
    }
    Regret r;
    r.total = sum / static_cast<double>(log.dims);
    r.per_step = log.steps.empty() ? 0.0 : r.total / static_cast<double>(log.steps.size());
    return r;
}

AverageQuality average_quality(const MonitorLog& log) {
    log.validate();
    AverageQuality out;
    out.per_step.reserve(log.steps.size());
    for (const auto& step : log.steps) {
        const double sum = std::accumulate(step.qualities.begin(), step.qualities.end(), 0.0);
        out.per_step.push_back(log.dims ? sum / static_cast<double>(log.dims) : 0.0);
    }
    if (!out.per_step.empty()) {
        out.overall = std::accumulate(out.per_step.begin(), out.per_step.end(), 0.0) /
                      static_cast<double>(out.per_step.size());
    }
    return out;
}

std::vector<double> update_frequency(const MonitorLog& log) {
    log.validate();
    std::vector<double> freq(log.dims, 0.0);
    if (log.steps.empty()) return freq;
    for (const auto& step : log.steps) {
        for (auto i : step.selected) freq[i] += 1.0;
    }
    for (auto& f : freq) f /= static_cast<double>(log.steps.size());
    return freq;
}

SuccessRate success_rate(const MonitorLog& log) {
    log.validate();
    SuccessRate r;
    for (const auto& step : log.steps) {
        r.attempts += step.selected.size();
        r.successes += static_cast<std::uint64_t>(
            std::count(step.successes.begin(), step.successes.end(), true));
    }
    if (r.attempts > 0) {
        r.per_attempt = static_cast<double>(r.successes) / static_cast<double>(r.attempts);
    }
    if (!log.steps.empty() && log.dims > 0) {
        r.per_dim_step = static_cast<double>(r.successes) /
                         (static_cast<double>(log.dims) * static_cast<double>(log.steps.size()));
    }
    return r;
}

namespace {

void check_ranking_args(std::span<const double> scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("got " + std::to_string(scores.size()) + " scores but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (scores.empty()) throw DataError("no scores to rank");
}

std::size_t count_positives(const std::vector<bool>& labels) {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
}

// Indices by descending score; equal scores keep input order.
std::vector<std::size_t> ranking(std::span<const double> scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

}  // namespace

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
    check_ranking_args(scores, labels);
    const std::size_t pos = count_positives(labels);
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw DataError("AUC needs both outliers and inliers");

    // Mid-ranks of the ascending order, then the Mann-Whitney U of the positives.
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t k = 0;
    while (k < idx.size()) {
        std::size_t end = k;
        while (end < idx.size() && scores[idx[end]] == scores[idx[k]]) ++end;
        const double mid = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t j = k; j < end; ++j) {
            if (labels[idx[j]]) rank_sum += mid;
        }
        k = end;
    }
    const double p = static_cast<double>(pos);
    const double u = rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
    check_ranking_args(scores, labels);
    const std::size_t pos = count_positives(labels);
    if (pos == 0) throw DataError("average precision needs at least one outlier");
    const auto idx = ranking(scores);
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (labels[idx[r]]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(pos);
}

PrecisionRecall precision_recall_at(std::span<const double> scores, const std::vector<bool>& labels,
                                    double percent) {
    check_ranking_args(scores, labels);
    if (!(percent > 0.0 && percent <= 100.0)) throw ConfigError("percent must lie in (0, 100]");
    const std::size_t pos = count_positives(labels);
    if (pos == 0) throw DataError("recall needs at least one outlier");
    const auto n = static_cast<double>(scores.size());
    const auto cutoff = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(percent * n / 100.0)));
    const auto idx = ranking(scores);
    std::size_t tp = 0;
    for (std::size_t r = 0; r < cutoff; ++r) tp += labels[idx[r]] ? 1 : 0;
    return {percent, static_cast<double>(tp) / static_cast<double>(cutoff),
            static_cast<double>(tp) / static_cast<double>(pos)};
}

RankingMetrics ranking_metrics(std::span<const double> scores, const std::vector<bool>& labels) {
    RankingMetrics m;
    m.auc = auc(scores, labels);
    m.ap = average_precision(scores, labels);
    for (std::size_t j = 0; j < kTopPercents.size(); ++j) {
        m.top[j] = precision_recall_at(scores, labels, kTopPercents[j]);
    }
    return m;
}

}  // namespace sgmrd
