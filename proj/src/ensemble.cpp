#include "sgmrd/ensemble.hpp"

#include "sgmrd/error.hpp"
#include "sgmrd/lof.hpp"
#include "sgmrd/parallel.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace sgmrd {

ScoreTable score_stream(std::span<const Observation> stream, const SubspaceSource& subspaces_at,
                        const ScoringConfig& cfg) {
    const std::size_t w = cfg.window_size;
    const std::size_t n = stream.size();
    if (cfg.eval_every < 1) throw ConfigError("evaluation stride must be at least 1");
    if (cfg.ks.empty()) throw ConfigError("no LOF neighbourhood size given");
    if (w < 2) throw ConfigError("window size must be at least 2");
    if (n < w) {
        throw DataError("cannot score: stream has " + std::to_string(n) +
                        " observations, window needs " + std::to_string(w));
    }
    const std::size_t k_max = *std::max_element(cfg.ks.begin(), cfg.ks.end());
    if (k_max >= w) throw ConfigError("LOF k must be smaller than the window size");

    std::vector<std::uint64_t> eval_times;
    for (std::uint64_t t = w; t <= n; t += cfg.eval_every) eval_times.push_back(t);
    if (eval_times.back() != n) eval_times.push_back(n);

    const std::size_t nk = cfg.ks.size();
    std::vector<std::vector<double>> sums(nk, std::vector<double>(n, 0.0));
    std::vector<std::uint64_t> counts(n, 0);

    for (const auto t : eval_times) {
        const SubspaceMap& map = subspaces_at(t);
        // Identical subspaces give identical LOF values: score each once, weight by multiplicity.
        std::map<Subspace, std::uint64_t> distinct;
        for (const auto& s : map.entries()) ++distinct[s];
        std::vector<std::pair<Subspace, std::uint64_t>> jobs(distinct.begin(), distinct.end());

        const auto window_rows = stream.subspan(t - w, w);
        std::vector<std::vector<std::vector<double>>> results(jobs.size());
        parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
            results[j] = lof_multi(project(window_rows, jobs[j].first), cfg.ks);
        });

        // Fixed reduction order keeps sums identical for any thread count.
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto weight = static_cast<double>(jobs[j].second);
            for (std::size_t q = 0; q < nk; ++q) {
                for (std::size_t r = 0; r < w; ++r) sums[q][t - w + r] += weight * results[j][q][r];
            }
            for (std::size_t r = 0; r < w; ++r) counts[t - w + r] += jobs[j].second;
        }
    }

    ScoreTable table;
    table.ks = cfg.ks;
    table.records.resize(nk);
    for (std::size_t q = 0; q < nk; ++q) {
        auto& recs = table.records[q];
        recs.reserve(n);
        for (std::size_t r = 0; r < n; ++r) {
            const double score = counts[r] ? sums[q][r] / static_cast<double>(counts[r]) : 0.0;
            recs.push_back({stream[r].time_index, score, counts[r], stream[r].label});
        }
    }
    return table;
}

ScoreTable score_stream(std::span<const Observation> stream, std::span<const Snapshot> snapshots,
                        const ScoringConfig& cfg) {
    const std::size_t w = cfg.window_size;
    if (stream.size() < w || snapshots.size() != stream.size() - w + 1) {
        throw DataError("snapshots do not line up with the stream: expected " +
                        std::to_string(stream.size() >= w ? stream.size() - w + 1 : 0) +
                        " snapshots, got " + std::to_string(snapshots.size()));
    }
    for (std::size_t s = 0; s < snapshots.size(); ++s) {
        if (snapshots[s].t != w + s) {
            throw DataError("snapshot " + std::to_string(s) + " has t=" +
                            std::to_string(snapshots[s].t) + ", expected " +
                            std::to_string(w + s));
        }
    }
    return score_stream(
        stream,
        [&](std::uint64_t t) -> const SubspaceMap& { return snapshots[t - w].subspaces; }, cfg);
}

ScoreTable score_stream_full_space(std::span<const Observation> stream, const ScoringConfig& cfg) {
    if (stream.empty()) throw DataError("empty stream");
    const std::size_t d = stream.front().values.size();
    // A single entry holding every dimension gives the same mean as d copies.
    const SubspaceMap full(std::vector<Subspace>(1, Subspace::full(d)));
    return score_stream(stream, [&](std::uint64_t) -> const SubspaceMap& { return full; }, cfg);
}

SweepResult best_k_sweep(const ScoreTable& table) {
    if (table.ks.empty()) throw ConfigError("empty k grid");
    SweepResult out;
    std::size_t best = 0;
    for (std::size_t q = 0; q < table.ks.size(); ++q) {
        const auto& recs = table.records[q];
        for (const auto& r : recs) {
            if (!r.label) throw DataError("k sweep needs a label for every observation");
        }
        out.per_k.push_back({table.ks[q], ranking_metrics(scores_of(recs), labels_of(recs))});
        const auto& cur = out.per_k.back();
        const auto& top = out.per_k[best];
        if (cur.metrics.auc > top.metrics.auc ||
            (cur.metrics.auc == top.metrics.auc && cur.k < top.k)) {
            best = q;
        }
    }
    out.best_k = table.ks[best];
    out.best_scores = table.records[best];
    return out;
}

std::vector<double> scores_of(std::span<const ScoreRecord> records) {
    std::vector<double> s;
    s.reserve(records.size());
    for (const auto& r : records) s.push_back(r.score);
    return s;
}

std::vector<bool> labels_of(std::span<const ScoreRecord> records) {
    std::vector<bool> l;
    l.reserve(records.size());
    for (const auto& r : records) l.push_back(r.label.value_or(false));
    return l;
}

}  // namespace sgmrd
