#include "sgmrd/benchgen.hpp"
#include "sgmrd/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace sgmrd;

namespace {

bool in_corner(const Observation& obs, const PlantedSubspace& p) {
    for (auto dim : p.dims.dims()) {
        if (obs.values[dim] < p.delta) return false;
    }
    return true;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generated distributions are disjoint and drift by half") {
    for (std::size_t d : {5, 10, 23}) {
        GeneratorConfig cfg;
        cfg.dims = d;
        cfg.phases = 6;
        cfg.per_phase = 50;
        cfg.seed = d;
        const auto data = generate(cfg);
        REQUIRE(data.distributions.size() == 7);
        CHECK(data.distributions[0].subspaces.empty());
        const std::size_t k = std::max<std::size_t>(1, d / 5);
        for (std::size_t i = 1; i < data.distributions.size(); ++i) {
            const auto& dist = data.distributions[i];
            CHECK(dist.subspaces.size() == k);
            std::set<std::size_t> used;
            for (const auto& p : dist.subspaces) {
                CHECK(p.dims.size() >= 2);
                CHECK(p.dims.size() <= 5);
                CHECK(p.delta >= 0.6);
                CHECK(p.delta <= 0.9);
                for (auto dim : p.dims.dims()) CHECK(used.insert(dim).second);
            }
            if (i >= 2) {
                std::size_t kept = 0;
                for (const auto& p : dist.subspaces) {
                    for (const auto& q : data.distributions[i - 1].subspaces) {
                        kept += p.dims == q.dims && p.delta == q.delta;
                    }
                }
                CHECK(kept == k - (k + 1) / 2);
            }
        }
    }
}

TEST_CASE("outliers sit in a planted corner, inliers in none") {
    GeneratorConfig cfg;
    cfg.dims = 10;
    cfg.phases = 4;
    cfg.per_phase = 2000;
    cfg.outlier_prob = 0.01;
    cfg.seed = 3;
    const auto data = generate(cfg);
    std::size_t outliers = 0;
    for (std::size_t r = 0; r < data.observations.size(); ++r) {
        const auto& obs = data.observations[r];
        CHECK(obs.time_index == r + 1);
        const auto& dist = data.distributions[data.source[r]];
        bool any = false;
        for (const auto& p : dist.subspaces) any = any || in_corner(obs, p);
        CHECK(any == *obs.label);
        outliers += *obs.label;
        for (double v : obs.values) {
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
    }
    // Phase 0 half comes from the empty distribution, so the rate is about 7/8 of p.
    const double rate = static_cast<double>(outliers) / 8000.0;
    CHECK(rate > 0.004);
    CHECK(rate < 0.014);
}

TEST_CASE("drift mixes the next distribution in linearly") {
    GeneratorConfig cfg;
    cfg.dims = 6;
    cfg.phases = 1;
    cfg.per_phase = 20000;
    const auto data = generate(cfg);
    std::size_t first_half = 0, second_half = 0;
    for (std::size_t r = 0; r < 20000; ++r) (r < 10000 ? first_half : second_half) += data.source[r];
    CHECK(first_half == doctest::Approx(2500).epsilon(0.1));
    CHECK(second_half == doctest::Approx(7500).epsilon(0.05));
}

TEST_CASE("per-subspace probability composes to the target") {
    GeneratorConfig cfg;
    cfg.dims = 50;
    const double q = cfg.per_subspace_prob();
    CHECK(1.0 - std::pow(1.0 - q, 10.0) == doctest::Approx(cfg.outlier_prob));
    cfg.dims = 4;
    cfg.max_subspace_dim = 4;
    CHECK(cfg.subspaces_per_distribution() == 1);
    CHECK(cfg.per_subspace_prob() == doctest::Approx(cfg.outlier_prob));
}

TEST_CASE("complement sampling avoids the corner") {
    SplitMix64 rng(1);
    for (int rep = 0; rep < 2000; ++rep) {
        const auto x = complement_sample(0.6, 3, rng);
        CHECK_FALSE((x[0] >= 0.6 && x[1] >= 0.6 && x[2] >= 0.6));
    }
    CHECK_THROWS_AS(complement_sample(1.0, 2, rng), ConfigError);
}

TEST_CASE("same seed gives identical bytes") {
    GeneratorConfig cfg;
    cfg.dims = 7;
    cfg.phases = 3;
    cfg.per_phase = 200;
    cfg.seed = 99;
    const auto dir = std::filesystem::temp_directory_path();
    write_dataset_csv(dir / "sgmrd_gen_a.csv", generate(cfg));
    write_dataset_csv(dir / "sgmrd_gen_b.csv", generate(cfg));
    const auto a = slurp(dir / "sgmrd_gen_a.csv");
    CHECK(a == slurp(dir / "sgmrd_gen_b.csv"));
    CHECK(a.substr(0, a.find('\n')) == "dim_0,dim_1,dim_2,dim_3,dim_4,dim_5,dim_6,label");
    cfg.seed = 100;
    write_dataset_csv(dir / "sgmrd_gen_b.csv", generate(cfg));
    CHECK(a != slurp(dir / "sgmrd_gen_b.csv"));

    const auto data = generate(cfg);
    const auto spec = spec_json(cfg, data);
    CHECK(spec.find("\"distributions\"") != std::string::npos);
    CHECK(spec == spec_json(cfg, generate(cfg)));
}

TEST_CASE("generator configuration checks") {
    GeneratorConfig cfg;
    cfg.dims = 4;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg = {};
    cfg.outlier_prob = 0.02;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.outlier_prob = -0.001;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_subspace_dim = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.delta_min = 0.95;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("zero outlier probability gives an inlier-only stream") {
    GeneratorConfig cfg;
    cfg.phases = 2;
    cfg.per_phase = 500;
    cfg.outlier_prob = 0.0;
    const auto data = generate(cfg);
    for (const auto& obs : data.observations) CHECK_FALSE(*obs.label);
}
