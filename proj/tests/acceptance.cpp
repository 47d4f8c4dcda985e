#include "oracles.hpp"

#include "sgmrd/benchgen.hpp"
#include "sgmrd/engine.hpp"
#include "sgmrd/ensemble.hpp"
#include "sgmrd/estimator.hpp"
#include "sgmrd/evalkit.hpp"
#include "sgmrd/lof.hpp"
#include "sgmrd/policy.hpp"
#include "sgmrd/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>

using namespace sgmrd;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t worker_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

SlidingWindow pair_window(std::uint64_t seed, const std::function<double(double, SplitMix64&)>& y) {
    SplitMix64 rng(seed);
    SlidingWindow w(2, 1000);
    for (std::uint64_t i = 1; i <= 1000; ++i) {
        const double x = rng.uniform();
        w.push({{x, y(x, rng)}, i, {}});
    }
    return w;
}

// 1: contrast calibration
Outcome estimator_calibration() {
    const auto start = Clock::now();
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto w = pair_window(seed, [](double, SplitMix64& r) { return r.uniform(); });
        EstimatorConfig cfg;
        cfg.seed = seed;
        sum += contrast(w, {0, 1}, 0, cfg).value;
    }
    const double mean = sum / 50.0;
    const auto dep = pair_window(99, [](double x, SplitMix64&) { return x; });
    EstimatorConfig cfg;
    cfg.seed = 99;
    const double q_dep = contrast(dep, {0, 1}, 0, cfg).value;
    const double secs = seconds_since(start);
    return {mean >= 0.4 && mean <= 0.6 && q_dep > 0.9 && secs < 5.0,
            "independent mean=" + fmt("%.4f", mean) + " y=x contrast=" + fmt("%.4f", q_dep) +
                " runtime=" + fmt("%.2f", secs) + "s"};
}

// 2: standard deviation shrinks like 1/sqrt(M)
Outcome hoeffding_scaling() {
    const auto w = pair_window(7, [](double x, SplitMix64& r) { return x + 8.0 * r.uniform(); });
    auto spread = [&](std::size_t m) {
        double s = 0.0, sq = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            EstimatorConfig cfg;
            cfg.iterations = m;
            cfg.seed = seed;
            const double v = contrast(w, {0, 1}, 0, cfg).value;
            s += v;
            sq += v * v;
        }
        const double mean = s / 100.0;
        return std::sqrt(std::max(0.0, (sq - 100.0 * mean * mean) / 99.0));
    };
    const double sd100 = spread(100);
    const double sd400 = spread(400);
    const double ratio = sd400 / sd100;
    return {sd100 > 0.0 && ratio <= 0.6, "std(M=100)=" + fmt("%.5f", sd100) + " std(M=400)=" +
                                             fmt("%.5f", sd400) + " ratio=" + fmt("%.3f", ratio)};
}

// 3: evaluation counts of search and initialisation
Outcome search_cost() {
    bool ok = true;
    std::ostringstream out;
    for (std::size_t d : {2, 5, 10, 50}) {
        SplitMix64 rng(d);
        SlidingWindow w(d, 200);
        for (std::uint64_t t = 1; t <= 200; ++t) {
            Observation obs;
            obs.time_index = t;
            for (std::size_t j = 0; j < d; ++j) obs.values.push_back(rng.uniform());
            w.push(std::move(obs));
        }
        EstimatorConfig cfg;
        cfg.iterations = 10;
        cfg.seed = d;
        EvaluationCounter counter;
        for (std::size_t target = 0; target < d; ++target) {
            const auto before = counter.value();
            greedy_search(w, target, cfg, &counter);
            ok = ok && counter.value() - before == 2 * d - 3;
        }
        EvaluationCounter init_counter;
        initialise(w, 200, cfg, 1, &init_counter);
        ok = ok && init_counter.value() == d * (2 * d - 3);
        out << "d=" << d << ": init=" << init_counter.value() << " (expect " << d * (2 * d - 3)
            << ") ";
    }
    return {ok, out.str()};
}

// 4: LOF against the all-pairs definition
Outcome lof_oracle() {
    SplitMix64 rng(404);
    double worst = 0.0;
    const std::vector<std::size_t> ks{1, 5, 20};
    for (int fixture = 0; fixture < 100; ++fixture) {
        const std::size_t n = 21 + rng.below(180);
        const std::size_t d = 1 + rng.below(5);
        const bool coarse = fixture % 3 == 0;  // duplicates and distance ties
        Matrix m;
        m.rows = n;
        m.cols = d;
        for (std::size_t i = 0; i < n * d; ++i) {
            const double v = rng.uniform();
            m.data.push_back(coarse ? std::floor(v * 4) : v);
        }
        const auto got = lof_multi(m, ks);
        for (std::size_t q = 0; q < ks.size(); ++q) {
            const auto want = oracle::lof(m, ks[q]);
            for (std::size_t i = 0; i < n; ++i) {
                const double rel = std::abs(got[q][i] - want[i]) / std::max(std::abs(want[i]), 1e-300);
                worst = std::max(worst, rel);
            }
        }
    }
    return {worst <= 1e-9, "max relative error=" + fmt("%.3g", worst)};
}

MonitorLog random_log(std::size_t d, std::size_t steps, SplitMix64& rng) {
    MonitorLog log;
    log.dims = d;
    for (std::size_t t = 0; t < steps; ++t) {
        MonitorStep s;
        s.t = 1000 + t;
        for (std::size_t i = 0; i < d; ++i) {
            // dyadic grid: every sum is exact in any order
            s.qualities.push_back(static_cast<double>(rng.below(1025)) / 1024.0);
            if (rng.uniform() < 0.2) {
                s.selected.push_back(i);
                s.successes.push_back(rng.uniform() < 0.4);
            }
        }
        log.steps.push_back(std::move(s));
    }
    return log;
}

// 5: metric oracles
Outcome metric_oracles() {
    SplitMix64 rng(505);
    int mismatches = 0;
    for (int fixture = 0; fixture < 100; ++fixture) {
        const std::size_t n = 2 + rng.below(999);
        const int levels = fixture % 2 ? 0 : 1 + static_cast<int>(rng.below(30));
        std::vector<double> scores;
        std::vector<bool> labels;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = rng.uniform();
            scores.push_back(levels ? std::floor(v * levels) : v);
            labels.push_back(rng.uniform() < 0.05);
        }
        labels[rng.below(n)] = true;
        std::size_t neg = rng.below(n);
        while (labels[neg] && std::count(labels.begin(), labels.end(), false) > 0) neg = rng.below(n);
        labels[neg] = false;
        if (std::count(labels.begin(), labels.end(), true) == 0) labels[(neg + 1) % n] = true;

        mismatches += auc(scores, labels) != oracle::auc(scores, labels);
        mismatches += average_precision(scores, labels) != oracle::average_precision(scores, labels);
        for (double pct : {1.0, 2.0, 5.0, 10.0, 37.5}) {
            const auto a = precision_recall_at(scores, labels, pct);
            const auto b = oracle::precision_recall_at(scores, labels, pct);
            mismatches += a.precision != b.precision || a.recall != b.recall;
        }

        const std::size_t d = 1 + rng.below(20);
        const std::size_t steps = 1 + rng.below(1000);
        const auto log = random_log(d, steps, rng);
        const auto gold = random_log(d, steps, rng);
        mismatches += regret(log, gold).total != oracle::regret_total(log, gold);
        mismatches += update_frequency(log) != oracle::update_frequency(log);
        const auto sr = success_rate(log);
        mismatches += sr.per_attempt.value_or(-1.0) != oracle::success_per_attempt(log);
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches over 100 fixtures"};
}

// 6: multiple-play Thompson sampling on Bernoulli arms
Outcome bandit_behavior() {
    const auto start = Clock::now();
    const std::size_t arms = 10, rounds = 5000;
    int good = 0;
    double lowest = 1.0;
    for (std::uint64_t run = 0; run < 20; ++run) {
        BanditState bandit(arms, 1000 + run);
        SplitMix64 env(run);
        std::size_t arm0 = 0;
        for (std::size_t r = 0; r < rounds; ++r) {
            const auto pick = bandit.select(1).selected.front();
            const double mu = pick == 0 ? 0.8 : 0.2;
            bandit.reward(pick, env.uniform() < mu);
            arm0 += pick == 0;
        }
        const double freq = static_cast<double>(arm0) / rounds;
        lowest = std::min(lowest, freq);
        good += freq > 0.9;
    }
    const double secs = seconds_since(start);
    return {good >= 19 && secs < 10.0, std::to_string(good) + "/20 runs above 0.9, lowest=" +
                                           fmt("%.4f", lowest) + " runtime=" + fmt("%.2f", secs) + "s"};
}

// 7: policy ordering on a drifting stream
Outcome policy_ordering() {
    GeneratorConfig g;
    g.dims = 20;
    g.phases = 10;
    g.per_phase = 1000;
    g.seed = 7;
    const auto stream = generate(g).observations;
    const PolicyMode policies[] = {PolicyMode::gold, PolicyMode::ts, PolicyMode::gd, PolicyMode::init};
    std::map<PolicyMode, double> q;
    for (auto mode : policies) {
        double sum = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            EngineConfig cfg;
            cfg.window_size = 1000;
            cfg.step_size = 2;
            cfg.plays = 1;
            cfg.policy = mode;
            cfg.seed = seed;
            cfg.threads = worker_threads();
            std::vector<Snapshot> snaps;
            run(stream, cfg, [&](const Snapshot& s) { snaps.push_back(s); });
            const double avg = average_quality(MonitorLog::from_snapshots(snaps)).overall;
            std::printf("    %s seed=%llu Q=%.5f\n", std::string(to_string(mode)).c_str(),
                        static_cast<unsigned long long>(seed), avg);
            std::fflush(stdout);
            sum += avg;
        }
        q[mode] = sum / 10.0;
    }
    const double gold = q[PolicyMode::gold], ts = q[PolicyMode::ts], gd = q[PolicyMode::gd],
                 init = q[PolicyMode::init];
    return {gold >= ts && ts >= gd && ts >= init + 0.01,
            "Q(Gold)=" + fmt("%.5f", gold) + " Q(TS)=" + fmt("%.5f", ts) + " Q(GD)=" +
                fmt("%.5f", gd) + " Q(Init)=" + fmt("%.5f", init)};
}

struct DetectionResult {
    double sgmrd_auc = 0.0;
    double lof_auc = 0.0;
};

DetectionResult detect(std::size_t d, std::uint64_t seed) {
    GeneratorConfig g;
    g.dims = d;
    g.phases = 10;
    g.per_phase = 1000;
    g.seed = seed;
    const auto stream = generate(g).observations;

    EngineConfig cfg;
    cfg.window_size = 1000;
    cfg.step_size = 1;
    cfg.plays = 1;
    cfg.policy = PolicyMode::ts;
    cfg.seed = seed;
    cfg.threads = worker_threads();
    std::vector<Snapshot> snaps;
    run(stream, cfg, [&](const Snapshot& s) { snaps.push_back(s); });

    ScoringConfig sc;
    sc.window_size = 1000;
    sc.eval_every = 100;
    sc.ks = kDefaultKGrid;
    sc.threads = worker_threads();
    DetectionResult r;
    const auto ours = best_k_sweep(score_stream(stream, snaps, sc));
    const auto base = best_k_sweep(score_stream_full_space(stream, sc));
    auto best_auc = [](const SweepResult& s) {
        for (const auto& k : s.per_k) {
            if (k.k == s.best_k) return k.metrics.auc;
        }
        return 0.0;
    };
    r.sgmrd_auc = best_auc(ours);
    r.lof_auc = best_auc(base);
    std::printf("    d=%zu seed=%llu SGMRD-TS AUC=%.4f (k=%zu) full-space LOF AUC=%.4f (k=%zu)\n", d,
                static_cast<unsigned long long>(seed), r.sgmrd_auc, ours.best_k, r.lof_auc,
                base.best_k);
    std::fflush(stdout);
    return r;
}

DetectionResult detect_average(std::size_t d, std::uint64_t seeds) {
    DetectionResult mean;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        const auto r = detect(d, seed);
        mean.sgmrd_auc += r.sgmrd_auc / static_cast<double>(seeds);
        mean.lof_auc += r.lof_auc / static_cast<double>(seeds);
    }
    return mean;
}

// 8: Synth10 end to end
Outcome synth10_detection() {
    const auto start = Clock::now();
    const auto r = detect_average(10, 10);
    const double secs = seconds_since(start);
    return {r.sgmrd_auc >= 0.85 && r.sgmrd_auc - r.lof_auc >= 0.02,
            "mean AUC SGMRD-TS=" + fmt("%.4f", r.sgmrd_auc) + " full-space LOF=" +
                fmt("%.4f", r.lof_auc) + " gap=" + fmt("%.4f", r.sgmrd_auc - r.lof_auc) +
                " runtime=" + fmt("%.0f", secs) + "s"};
}

// 9: Synth20 and Synth50 dominance
Outcome high_dim_detection() {
    const auto start = Clock::now();
    const auto r20 = detect_average(20, 5);
    const auto r50 = detect_average(50, 5);
    const double secs = seconds_since(start);
    const double gap20 = r20.sgmrd_auc - r20.lof_auc, gap50 = r50.sgmrd_auc - r50.lof_auc;
    return {gap20 >= 0.05 && gap50 >= 0.05,
            "d=20: SGMRD-TS=" + fmt("%.4f", r20.sgmrd_auc) + " LOF=" + fmt("%.4f", r20.lof_auc) +
                " gap=" + fmt("%.4f", gap20) + "; d=50: SGMRD-TS=" + fmt("%.4f", r50.sgmrd_auc) +
                " LOF=" + fmt("%.4f", r50.lof_auc) + " gap=" + fmt("%.4f", gap50) +
                " runtime=" + fmt("%.0f", secs) + "s"};
}

bool same(const Snapshot& a, const Snapshot& b) {
    return a.t == b.t && a.subspaces == b.subspaces && a.qualities == b.qualities &&
           a.selected == b.selected && a.successes == b.successes && a.evaluations == b.evaluations;
}

bool same(const ScoreTable& a, const ScoreTable& b) {
    if (a.ks != b.ks || a.records.size() != b.records.size()) return false;
    for (std::size_t q = 0; q < a.records.size(); ++q) {
        for (std::size_t r = 0; r < a.records[q].size(); ++r) {
            const auto &x = a.records[q][r], &y = b.records[q][r];
            if (x.time_index != y.time_index || x.score != y.score ||
                x.contributions != y.contributions || x.label != y.label) {
                return false;
            }
        }
    }
    return true;
}

// 10: anytime contracts
Outcome streaming_contracts() {
    GeneratorConfig g;
    g.dims = 6;
    g.phases = 3;
    g.per_phase = 200;
    g.seed = 10;
    const auto stream = generate(g).observations;
    EngineConfig cfg;
    cfg.window_size = 200;
    cfg.step_size = 5;
    cfg.plays = 2;
    cfg.estimator.iterations = 30;
    cfg.seed = 3;

    std::size_t prefix_bad = 0, count_bad = 0, thread_bad = 0;
    for (auto mode : {PolicyMode::ts, PolicyMode::rd, PolicyMode::gd, PolicyMode::batch,
                      PolicyMode::init, PolicyMode::gold}) {
        auto c = cfg;
        c.policy = mode;
        std::vector<Snapshot> full;
        run(stream, c, [&](const Snapshot& s) { full.push_back(s); });

        for (std::size_t len : {200, 333, 451}) {
            std::vector<Snapshot> part;
            run(std::span(stream).first(len), c, [&](const Snapshot& s) { part.push_back(s); });
            if (part.size() != len - 199) {
                ++prefix_bad;
                continue;
            }
            for (std::size_t s = 0; s < part.size(); ++s) prefix_bad += !same(part[s], full[s]);
        }

        for (std::size_t s = 1; s < full.size(); ++s) {
            if (full[s].selected.empty()) count_bad += full[s].evaluations - full[s - 1].evaluations != g.dims;
        }

        auto threaded = c;
        threaded.threads = 4;
        std::vector<Snapshot> four;
        run(stream, threaded, [&](const Snapshot& s) { four.push_back(s); });
        thread_bad += four.size() != full.size();
        for (std::size_t s = 0; s < std::min(four.size(), full.size()); ++s) thread_bad += !same(four[s], full[s]);

        ScoringConfig sc;
        sc.window_size = 200;
        sc.eval_every = 37;
        sc.ks = {2, 10};
        const auto one = score_stream(stream, full, sc);
        sc.threads = 4;
        thread_bad += !same(one, score_stream(stream, four, sc));
    }
    return {prefix_bad == 0 && count_bad == 0 && thread_bad == 0,
            "prefix mismatches=" + std::to_string(prefix_bad) + " non-constant steps=" +
                std::to_string(count_bad) + " thread mismatches=" + std::to_string(thread_bad)};
}

const std::function<Outcome()> kCriteria[] = {
    estimator_calibration, hoeffding_scaling, search_cost,       lof_oracle,
    metric_oracles,        bandit_behavior,   policy_ordering,   synth10_detection,
    high_dim_detection,    streaming_contracts,
};

const char* kNames[] = {
    "estimator calibration",  "hoeffding scaling",       "search cost",
    "LOF oracle equivalence", "metric oracles",          "bandit behavior",
    "policy ordering",        "Synth10 detection",       "Synth20/Synth50 dominance",
    "streaming contracts",
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    std::FILE* log = nullptr;
    for (int a = 1; a < argc; ++a) {
        if (std::string(argv[a]) == "--log" && a + 1 < argc) {
            log = std::fopen(argv[++a], "a");
            continue;
        }
        const int c = std::atoi(argv[a]);
        if (c < 1 || c > 10) {
            std::fprintf(stderr, "usage: acceptance [--log FILE] [criterion 1-10 ...]\n");
            return 2;
        }
        which.push_back(c);
    }
    if (which.empty()) {
        for (int c = 1; c <= 10; ++c) which.push_back(c);
    }
    bool all = true;
    for (int c : which) {
        Outcome o;
        try {
            o = kCriteria[c - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        char line[1024];
        std::snprintf(line, sizeof line, "[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c,
                      kNames[c - 1], o.detail.c_str());
        std::fputs(line, stdout);
        std::fflush(stdout);
        if (log) {
            std::fputs(line, log);
            std::fflush(log);
        }
        all = all && o.pass;
    }
    if (log) std::fclose(log);
    return all ? 0 : 1;
}
