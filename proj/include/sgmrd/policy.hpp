#pragma once

#include "sgmrd/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgmrd {

// Which dimensions get their subspace re-searched in an update round.
enum class PolicyMode {
    ts,     // multiple-play Thompson sampling
    rd,     // L dimensions uniformly at random
    gd,     // L dimensions with the lowest smoothed quality
    batch,  // full re-initialisation whenever t is a multiple of w
    init,   // never update
    gold,   // full re-initialisation every round
};

std::optional<PolicyMode> parse_policy(std::string_view name);
std::string_view to_string(PolicyMode mode);

struct PolicyDecision {
    std::vector<std::size_t> selected;  // ascending, distinct
};

// Beta(alpha_i, beta_i) posteriors over Bernoulli arms, one arm per dimension.
class BanditState {
public:
    BanditState(std::size_t arms, std::uint64_t seed);

    std::size_t arms() const noexcept { return alpha_.size(); }
    std::span<const double> alpha() const noexcept { return alpha_; }
    std::span<const double> beta() const noexcept { return beta_; }
    std::uint64_t plays(std::size_t arm) const;

    // Draws theta_i ~ Beta(alpha_i, beta_i) for every arm and returns the L
    // largest (lowest index on ties). Advances the sampler, not the posteriors.
    PolicyDecision select(std::size_t plays);

    // Success increments alpha, failure increments beta.
    void reward(std::size_t arm, bool success);

    // Only for tests and replays: overwrite the posterior of one arm.
    void set_posterior(std::size_t arm, double alpha, double beta);

private:
    std::vector<double> alpha_;
    std::vector<double> beta_;
    SplitMix64 rng_;
};

// Beta variate via two Gamma draws.
double sample_beta(double alpha, double beta, SplitMix64& rng);

PolicyDecision rd_select(std::size_t d, std::size_t plays, SplitMix64& rng);

// The `plays` dimensions with the smallest quality, lowest index on ties.
PolicyDecision gd_select(std::span<const double> qualities, std::size_t plays);

// Batch, Init and Gold ignore the posteriors: Batch selects every dimension
// when t is a multiple of w, Init never selects, Gold always selects all.
PolicyDecision schedule_select(PolicyMode mode, std::uint64_t t, std::size_t window_size,
                               std::size_t d);

}  // namespace sgmrd
