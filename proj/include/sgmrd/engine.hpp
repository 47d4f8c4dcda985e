#pragma once

#include "sgmrd/estimator.hpp"
#include "sgmrd/policy.hpp"
#include "sgmrd/search.hpp"
#include "sgmrd/stream.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sgmrd {

struct EngineConfig {
    std::size_t window_size = 1000;  // w
    std::size_t step_size = 1;       // v: update every v-th observation
    std::size_t plays = 1;           // L
    double gamma = 0.9;              // smoothing weight of the previous estimate
    EstimatorConfig estimator{};     // estimator.seed is overridden by `seed`
    PolicyMode policy = PolicyMode::ts;
    bool monitor_every_step = true;  // false: refresh estimates only at update rounds
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate(std::size_t d) const;
};

// Smoothed quality Q_t and the latest raw estimate q_t, per dimension.
struct MonitorState {
    std::vector<double> smoothed;
    std::vector<double> last_raw;
};

struct Snapshot {
    std::uint64_t t = 0;
    SubspaceMap subspaces;
    std::vector<double> qualities;       // smoothed Q_t
    std::vector<std::size_t> selected;   // I_t, empty outside update rounds
    std::vector<bool> successes;         // aligned with `selected`
    std::uint64_t evaluations = 0;       // cumulative contrast evaluations
};

// Seeds for the searches and monitoring estimates at time t, derived from one
// estimator seed so every step is reproducible in isolation.
std::uint64_t search_seed(std::uint64_t estimator_seed, std::uint64_t t, std::size_t dim);
std::uint64_t monitor_seed(std::uint64_t estimator_seed, std::uint64_t t, std::size_t dim);

struct Initialisation {
    SubspaceMap subspaces;
    MonitorState monitor;
};

// Greedy search for every dimension on a full window (time index t).
Initialisation initialise(const SlidingWindow& window, std::uint64_t t, const EstimatorConfig& cfg,
                          std::size_t threads = 1, EvaluationCounter* counter = nullptr);

// Refreshes the raw estimate of every current subspace and folds it into the
// smoothed quality: Q <- gamma * Q + (1 - gamma) * q.
void monitor_step(MonitorState& state, const SubspaceMap& subspaces, const SlidingWindow& window,
                  std::uint64_t t, double gamma, const EstimatorConfig& cfg,
                  std::size_t threads = 1, EvaluationCounter* counter = nullptr);

struct UpdateOutcome {
    std::vector<std::size_t> selected;
    std::vector<bool> successes;
};

// Re-searches every selected dimension. A result is a success when its
// quality beats the smoothed quality and the subspace differs from the
// current one. Policies ts/rd/gd only adopt successes (and ts feeds the
// outcome back into `bandit`); batch/gold adopt every result. An adopted
// subspace resets the smoothed quality to its search quality.
UpdateOutcome update_step(SubspaceMap& subspaces, MonitorState& state, BanditState* bandit,
                          const SlidingWindow& window, std::uint64_t t,
                          std::span<const std::size_t> selected, PolicyMode mode,
                          const EstimatorConfig& cfg, std::size_t threads = 1,
                          EvaluationCounter* counter = nullptr);

// Streaming driver: fills the first window, initialises, then per observation
// pushes, monitors and, every v-th step, runs an update round.
class Engine {
public:
    Engine(std::size_t d, EngineConfig cfg);

    // Returns a snapshot once the first window is full (the first one at t = w).
    std::optional<Snapshot> push(Observation obs);

    bool initialised() const noexcept { return initialised_; }
    std::size_t dims() const noexcept { return window_.dims(); }
    const EngineConfig& config() const noexcept { return cfg_; }
    const SlidingWindow& window() const noexcept { return window_; }
    const SubspaceMap& subspaces() const noexcept { return subspaces_; }
    const MonitorState& monitor() const noexcept { return monitor_; }
    const BanditState& bandit() const noexcept { return bandit_; }
    std::uint64_t evaluation_counter() const noexcept { return counter_.value(); }
    std::uint64_t update_rounds() const noexcept { return update_rounds_; }

private:
    PolicyDecision decide(std::uint64_t t);
    Snapshot snapshot(std::uint64_t t, UpdateOutcome outcome) const;

    EngineConfig cfg_;
    EstimatorConfig estimator_;
    SlidingWindow window_;
    SubspaceMap subspaces_;
    MonitorState monitor_;
    BanditState bandit_;
    SplitMix64 policy_rng_;
    EvaluationCounter counter_;
    std::uint64_t t_ = 0;
    std::uint64_t update_rounds_ = 0;
    bool initialised_ = false;
};

// Runs the engine over a finite stream, handing each snapshot to `sink`.
// Throws DataError if the stream is shorter than the window.
void run(std::span<const Observation> stream, const EngineConfig& cfg,
         const std::function<void(const Snapshot&)>& sink);

}  // namespace sgmrd
