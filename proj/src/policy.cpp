#include "sgmrd/policy.hpp"

#include "sgmrd/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace sgmrd {

std::optional<PolicyMode> parse_policy(std::string_view name) {
    if (name == "ts") return PolicyMode::ts;
    if (name == "rd") return PolicyMode::rd;
    if (name == "gd") return PolicyMode::gd;
    if (name == "batch") return PolicyMode::batch;
    if (name == "init") return PolicyMode::init;
    if (name == "gold") return PolicyMode::gold;
    return std::nullopt;
}

std::string_view to_string(PolicyMode mode) {
    switch (mode) {
        case PolicyMode::ts: return "ts";
        case PolicyMode::rd: return "rd";
        case PolicyMode::gd: return "gd";
        case PolicyMode::batch: return "batch";
        case PolicyMode::init: return "init";
        case PolicyMode::gold: return "gold";
    }
    return "unknown";
}

namespace {

void check_plays(std::size_t plays, std::size_t d) {
    if (plays > d) {
        throw ConfigError("cannot play " + std::to_string(plays) + " of " + std::to_string(d) +
                          " arms");
    }
}

// Indices of the `plays` largest keys, lowest index first on ties, returned ascending.
std::vector<std::size_t> top_indices(std::span<const double> keys, std::size_t plays) {
    std::vector<std::size_t> idx(keys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
    idx.resize(plays);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

BanditState::BanditState(std::size_t arms, std::uint64_t seed)
    : alpha_(arms, 1.0), beta_(arms, 1.0), rng_(seed) {}

std::uint64_t BanditState::plays(std::size_t arm) const {
    if (arm >= arms()) throw IndexError("arm " + std::to_string(arm) + " out of range");
    return static_cast<std::uint64_t>(alpha_[arm] + beta_[arm] - 2.0);
}

double sample_beta(double alpha, double beta, SplitMix64& rng) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y <= 0.0) return 0.5;
    return x / (x + y);
}

PolicyDecision BanditState::select(std::size_t plays) {
    if (plays < 1) throw ConfigError("Thompson sampling needs at least one play per round");
    check_plays(plays, arms());
    std::vector<double> theta(arms());
    for (std::size_t i = 0; i < arms(); ++i) theta[i] = sample_beta(alpha_[i], beta_[i], rng_);
    return {top_indices(theta, plays)};
}

void BanditState::reward(std::size_t arm, bool success) {
    if (arm >= arms()) throw IndexError("arm " + std::to_string(arm) + " out of range");
    (success ? alpha_ : beta_)[arm] += 1.0;
}

void BanditState::set_posterior(std::size_t arm, double alpha, double beta) {
    if (arm >= arms()) throw IndexError("arm " + std::to_string(arm) + " out of range");
    if (alpha < 1.0 || beta < 1.0) throw ConfigError("posterior parameters must be >= 1");
    alpha_[arm] = alpha;
    beta_[arm] = beta;
}

PolicyDecision rd_select(std::size_t d, std::size_t plays, SplitMix64& rng) {
    check_plays(plays, d);
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < plays; ++k) {
        const auto pick = k + rng.below(d - k);
        std::swap(idx[k], idx[pick]);
    }
    idx.resize(plays);
    std::sort(idx.begin(), idx.end());
    return {std::move(idx)};
}

PolicyDecision gd_select(std::span<const double> qualities, std::size_t plays) {
    check_plays(plays, qualities.size());
    std::vector<double> negated(qualities.begin(), qualities.end());
    for (auto& q : negated) q = -q;
    return {top_indices(negated, plays)};
}

PolicyDecision schedule_select(PolicyMode mode, std::uint64_t t, std::size_t window_size,
                               std::size_t d) {
    if (window_size == 0) throw ConfigError("window size must be positive");
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), std::size_t{0});
    switch (mode) {
        case PolicyMode::batch:
            if (t % window_size == 0) return {std::move(all)};
            return {};
        case PolicyMode::init: return {};
        case PolicyMode::gold: return {std::move(all)};
        default: throw ConfigError("schedule_select only handles batch, init and gold");
    }
}

}  // namespace sgmrd
