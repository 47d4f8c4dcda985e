#include "oracles.hpp"

#include "sgmrd/error.hpp"
#include "sgmrd/evalkit.hpp"
#include "sgmrd/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace sgmrd;

namespace {

struct Ranked {
    std::vector<double> scores;
    std::vector<bool> labels;
};

Ranked random_ranking(SplitMix64& rng) {
    Ranked r;
    const std::size_t n = 2 + rng.below(999);
    const int levels = rng.below(2) ? 0 : 1 + static_cast<int>(rng.below(20));
    for (std::size_t i = 0; i < n; ++i) {
        const double v = rng.uniform();
        r.scores.push_back(levels ? std::floor(v * levels) : v);
        r.labels.push_back(rng.uniform() < 0.1);
    }
    r.labels[0] = true;
    r.labels[1] = false;
    return r;
}

// Qualities on a 1/1024 grid, so every sum is exact whatever the order.
MonitorLog random_log(std::size_t d, std::size_t steps, SplitMix64& rng) {
    MonitorLog log;
    log.dims = d;
    for (std::size_t t = 0; t < steps; ++t) {
        MonitorStep s;
        s.t = 100 + t;
        for (std::size_t i = 0; i < d; ++i) {
            s.qualities.push_back(static_cast<double>(rng.below(1025)) / 1024.0);
            if (rng.uniform() < 0.3) {
                s.selected.push_back(i);
                s.successes.push_back(rng.uniform() < 0.5);
            }
        }
        log.steps.push_back(std::move(s));
    }
    return log;
}

}  // namespace

TEST_CASE("ranking metrics match brute force") {
    SplitMix64 rng(21);
    for (int rep = 0; rep < 60; ++rep) {
        const auto r = random_ranking(rng);
        CHECK(auc(r.scores, r.labels) == oracle::auc(r.scores, r.labels));
        CHECK(average_precision(r.scores, r.labels) == oracle::average_precision(r.scores, r.labels));
        for (double pct : kTopPercents) {
            const auto got = precision_recall_at(r.scores, r.labels, pct);
            const auto want = oracle::precision_recall_at(r.scores, r.labels, pct);
            CHECK(got.precision == want.precision);
            CHECK(got.recall == want.recall);
        }
    }
}

TEST_CASE("ranking metric examples") {
    const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
    CHECK(auc(s, {true, false, true, false}) == 0.75);
    CHECK(auc(s, {true, true, false, false}) == 1.0);
    CHECK(auc(s, {false, false, true, true}) == 0.0);
    CHECK(auc(std::vector<double>{1, 1}, {true, false}) == 0.5);
    CHECK(average_precision(s, {true, true, false, false}) == 1.0);
    CHECK(average_precision(s, {false, false, true, false}) == doctest::Approx(1.0 / 3.0));
    std::vector<double> many(200);
    std::vector<bool> labels(200, false);
    for (std::size_t i = 0; i < 200; ++i) many[i] = -static_cast<double>(i);
    labels[0] = labels[1] = labels[2] = true;
    const auto top = precision_recall_at(many, labels, 1.0);  // cutoff 2
    CHECK(top.precision == 1.0);
    CHECK(top.recall == doctest::Approx(2.0 / 3.0));
    const auto none = precision_recall_at(many, std::vector<bool>(labels.rbegin(), labels.rend()), 1.0);
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK_THROWS_AS(auc(s, {true, true, true, true}), DataError);
    CHECK_THROWS_AS(auc(s, {true}), ShapeError);
    CHECK_THROWS_AS(precision_recall_at(s, {true, false, false, false}, 0.0), ConfigError);
}

TEST_CASE("ranking metrics are invariant under monotone transforms") {
    SplitMix64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto r = random_ranking(rng);
        std::vector<double> t;
        for (double v : r.scores) t.push_back(std::exp(3.0 * v) - 10.0);
        const auto a = ranking_metrics(r.scores, r.labels);
        const auto b = ranking_metrics(t, r.labels);
        CHECK(a.auc == b.auc);
        CHECK(a.ap == b.ap);
        for (std::size_t j = 0; j < 3; ++j) CHECK(a.top[j].precision == b.top[j].precision);
    }
}

TEST_CASE("monitoring metrics match brute force") {
    SplitMix64 rng(8);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t d = 1 + rng.below(10);
        const std::size_t steps = 1 + rng.below(100);
        const auto log = random_log(d, steps, rng);
        const auto gold = random_log(d, steps, rng);
        const auto r = regret(log, gold);
        CHECK(r.total == oracle::regret_total(log, gold));
        CHECK(r.per_step == r.total / static_cast<double>(steps));
        CHECK(update_frequency(log) == oracle::update_frequency(log));
        const auto u = success_rate(log);
        if (u.attempts) CHECK(*u.per_attempt == oracle::success_per_attempt(log));
        const auto q = average_quality(log);
        double sum = 0;
        for (const auto& s : log.steps) {
            double step = 0;
            for (double v : s.qualities) step += v;
            sum += step / static_cast<double>(d);
        }
        CHECK(q.overall == sum / static_cast<double>(steps));
    }
}

TEST_CASE("monitoring metric examples") {
    MonitorLog log;
    log.dims = 2;
    log.steps.push_back({1, {0.2, 0.8}, {}, {}});
    log.steps.push_back({2, {0.2, 0.8}, {0, 1}, {true, false}});
    MonitorLog gold = log;
    for (auto& s : gold.steps) s.qualities = {0.7, 1.3};
    CHECK(regret(log, log).total == 0.0);
    CHECK(regret(log, gold).total == doctest::Approx(1.0));  // gap 0.5 over 2 steps
    CHECK(average_quality(log).overall == doctest::Approx(0.5));
    CHECK(update_frequency(log) == std::vector<double>{0.5, 0.5});
    const auto u = success_rate(log);
    CHECK(u.attempts == 2);
    CHECK(*u.per_attempt == 0.5);
    CHECK(*u.per_dim_step == 0.25);

    MonitorLog idle = log;
    for (auto& s : idle.steps) s.selected.clear(), s.successes.clear();
    CHECK_FALSE(success_rate(idle).per_attempt.has_value());

    MonitorLog broken = log;
    broken.steps[1].successes.pop_back();
    CHECK_THROWS_AS(broken.validate(), ShapeError);
    gold.steps.pop_back();
    CHECK_THROWS_AS(regret(log, gold), DataError);
}
