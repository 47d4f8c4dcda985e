#include "sgmrd/engine.hpp"

#include "sgmrd/error.hpp"
#include "sgmrd/parallel.hpp"

#include <string>

namespace sgmrd {

namespace {

constexpr std::uint64_t kSearchTag = 0x5345415243480000ULL;
constexpr std::uint64_t kMonitorTag = 0x4d4f4e49544f5200ULL;

}  // namespace

void EngineConfig::validate(std::size_t d) const {
    if (window_size < 2) throw ConfigError("window size must be at least 2");
    if (step_size < 1) throw ConfigError("step size must be at least 1");
    if (plays > d) {
        throw ConfigError("plays per round (" + std::to_string(plays) + ") exceeds d=" +
                          std::to_string(d));
    }
    if ((policy == PolicyMode::ts || policy == PolicyMode::rd || policy == PolicyMode::gd) &&
        plays < 1) {
        throw ConfigError("policy " + std::string(to_string(policy)) + " needs plays >= 1");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (d < 2) throw ConfigError("subspace search needs at least two dimensions");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    estimator.validate();
}

std::uint64_t search_seed(std::uint64_t estimator_seed, std::uint64_t t, std::size_t dim) {
    return derive_seed(estimator_seed, kSearchTag, t, dim);
}

std::uint64_t monitor_seed(std::uint64_t estimator_seed, std::uint64_t t, std::size_t dim) {
    return derive_seed(estimator_seed, kMonitorTag, t, dim);
}

Initialisation initialise(const SlidingWindow& window, std::uint64_t t, const EstimatorConfig& cfg,
                          std::size_t threads, EvaluationCounter* counter) {
    if (!window.full()) {
        throw DataError("initialisation needs a full window (" + std::to_string(window.size()) +
                        " of " + std::to_string(window.capacity()) + " observations)");
    }
    const std::size_t d = window.dims();
    std::vector<SearchResult> results(d);
    parallel_for(d, threads, [&](std::size_t i) {
        EstimatorConfig c = cfg;
        c.seed = search_seed(cfg.seed, t, i);
        results[i] = greedy_search(window, i, c, counter);
    });

    Initialisation out;
    std::vector<Subspace> entries;
    entries.reserve(d);
    out.monitor.smoothed.resize(d);
    out.monitor.last_raw.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        entries.push_back(std::move(results[i].subspace));
        out.monitor.smoothed[i] = results[i].quality;
        out.monitor.last_raw[i] = results[i].quality;
    }
    out.subspaces = SubspaceMap(std::move(entries));
    return out;
}

void monitor_step(MonitorState& state, const SubspaceMap& subspaces, const SlidingWindow& window,
                  std::uint64_t t, double gamma, const EstimatorConfig& cfg, std::size_t threads,
                  EvaluationCounter* counter) {
    const std::size_t d = subspaces.size();
    if (state.smoothed.size() != d || state.last_raw.size() != d) {
        throw ShapeError("monitor state does not match the subspace map");
    }
    std::vector<double> raw(d);
    parallel_for(d, threads, [&](std::size_t i) {
        EstimatorConfig c = cfg;
        c.seed = monitor_seed(cfg.seed, t, i);
        raw[i] = contrast(window, subspaces[i], i, c, counter).value;
    });
    for (std::size_t i = 0; i < d; ++i) {
        state.smoothed[i] = gamma * state.smoothed[i] + (1.0 - gamma) * raw[i];
        state.last_raw[i] = raw[i];
    }
}

UpdateOutcome update_step(SubspaceMap& subspaces, MonitorState& state, BanditState* bandit,
                          const SlidingWindow& window, std::uint64_t t,
                          std::span<const std::size_t> selected, PolicyMode mode,
                          const EstimatorConfig& cfg, std::size_t threads,
                          EvaluationCounter* counter) {
    const std::size_t d = subspaces.size();
    for (auto i : selected) {
        if (i >= d) throw IndexError("selected dimension " + std::to_string(i) + " out of range");
    }
    std::vector<SearchResult> results(selected.size());
    parallel_for(selected.size(), threads, [&](std::size_t k) {
        EstimatorConfig c = cfg;
        c.seed = search_seed(cfg.seed, t, selected[k]);
        results[k] = greedy_search(window, selected[k], c, counter);
    });

    const bool always_adopt = mode == PolicyMode::batch || mode == PolicyMode::gold;
    UpdateOutcome out;
    out.selected.assign(selected.begin(), selected.end());
    out.successes.reserve(selected.size());
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const std::size_t i = selected[k];
        auto& found = results[k];
        const bool better = found.quality > state.smoothed[i];
        const bool changed = found.subspace != subspaces[i];
        const bool success = better && changed;
        out.successes.push_back(success);
        if (success || always_adopt) {
            subspaces.assign(i, std::move(found.subspace));
            state.smoothed[i] = found.quality;
            state.last_raw[i] = found.quality;
        }
        if (mode == PolicyMode::ts && bandit) bandit->reward(i, success);
    }
    return out;
}

Engine::Engine(std::size_t d, EngineConfig cfg)
    : cfg_(cfg),
      estimator_(cfg.estimator),
      window_(d, cfg.window_size),
      bandit_(d, substream(cfg.seed, "policy")),
      policy_rng_(substream(cfg.seed, "policy")) {
    cfg_.validate(d);
    estimator_.seed = substream(cfg.seed, "estimator");
}

PolicyDecision Engine::decide(std::uint64_t t) {
    switch (cfg_.policy) {
        case PolicyMode::ts: return bandit_.select(cfg_.plays);
        case PolicyMode::rd: return rd_select(dims(), cfg_.plays, policy_rng_);
        case PolicyMode::gd: return gd_select(monitor_.smoothed, cfg_.plays);
        default: return schedule_select(cfg_.policy, t, cfg_.window_size, dims());
    }
}

Snapshot Engine::snapshot(std::uint64_t t, UpdateOutcome outcome) const {
    return {t, subspaces_, monitor_.smoothed, std::move(outcome.selected),
            std::move(outcome.successes), counter_.value()};
}

std::optional<Snapshot> Engine::push(Observation obs) {
    window_.push(std::move(obs));
    const std::uint64_t t = ++t_;

    if (!initialised_) {
        if (!window_.full()) return std::nullopt;
        auto init = initialise(window_, t, estimator_, cfg_.threads, &counter_);
        subspaces_ = std::move(init.subspaces);
        monitor_ = std::move(init.monitor);
        initialised_ = true;
        return snapshot(t, {});
    }

    const bool update_round = (t - cfg_.window_size) % cfg_.step_size == 0;
    if (cfg_.monitor_every_step || update_round) {
        monitor_step(monitor_, subspaces_, window_, t, cfg_.gamma, estimator_, cfg_.threads,
                     &counter_);
    }
    if (!update_round) return snapshot(t, {});

    ++update_rounds_;
    const auto decision = decide(t);
    auto outcome = update_step(subspaces_, monitor_, &bandit_, window_, t, decision.selected,
                               cfg_.policy, estimator_, cfg_.threads, &counter_);
    return snapshot(t, std::move(outcome));
}

void run(std::span<const Observation> stream, const EngineConfig& cfg,
         const std::function<void(const Snapshot&)>& sink) {
    if (stream.empty()) throw DataError("empty stream");
    Engine engine(stream.front().values.size(), cfg);
    for (const auto& obs : stream) {
        if (auto snap = engine.push(obs)) sink(*snap);
    }
    if (!engine.initialised()) {
        throw DataError("stream ended after " + std::to_string(stream.size()) +
                        " observations, window needs " + std::to_string(cfg.window_size));
    }
}

}  // namespace sgmrd
