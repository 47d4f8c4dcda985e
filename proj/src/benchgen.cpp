#include "sgmrd/benchgen.hpp"

#include "sgmrd/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace sgmrd {

void GeneratorConfig::validate() const {
    if (max_subspace_dim < 2) throw ConfigError("planted subspaces need at least two dimensions");
    if (dims < max_subspace_dim) {
        throw ConfigError("cannot plant subspaces of up to " + std::to_string(max_subspace_dim) +
                          " dimensions in d=" + std::to_string(dims));
    }
    if (phases < 1) throw ConfigError("need at least one phase");
    if (per_phase < 1) throw ConfigError("need at least one observation per phase");
    if (!(outlier_prob >= 0.0 && outlier_prob <= 0.01)) {
        throw ConfigError("outlier probability must lie in [0, 0.01]");
    }
    if (!(delta_min > 0.0 && delta_min <= delta_max && delta_max < 1.0)) {
        throw ConfigError("outlier offsets must satisfy 0 < delta_min <= delta_max < 1");
    }
}

std::size_t GeneratorConfig::subspaces_per_distribution() const {
    return std::max<std::size_t>(1, dims / max_subspace_dim);
}

double GeneratorConfig::per_subspace_prob() const {
    const auto k = static_cast<double>(subspaces_per_distribution());
    return 1.0 - std::pow(1.0 - outlier_prob, 1.0 / k);
}

std::vector<double> complement_sample(double delta, std::size_t m, SplitMix64& rng) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    std::vector<double> x(m);
    while (true) {
        bool in_corner = true;
        for (auto& v : x) {
            v = rng.uniform();
            in_corner = in_corner && v >= delta;
        }
        if (!in_corner) return x;
    }
}

namespace {

double uniform_in(double lo, double hi, SplitMix64& rng) { return lo + (hi - lo) * rng.uniform(); }

std::size_t uniform_size(std::size_t lo, std::size_t hi, SplitMix64& rng) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.below(k)]);
}

// Draws `count` new disjoint subspaces, taking dimensions from `preferred`
// first and falling back to `fallback`.
std::vector<PlantedSubspace> draw_subspaces(std::size_t count, std::vector<std::size_t> preferred,
                                            std::vector<std::size_t> fallback,
                                            const GeneratorConfig& cfg, SplitMix64& rng) {
    shuffle(preferred, rng);
    shuffle(fallback, rng);
    std::vector<std::size_t> pool = preferred;
    pool.insert(pool.end(), fallback.begin(), fallback.end());

    std::vector<PlantedSubspace> out;
    std::size_t next = 0;
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t left = count - s - 1;
        // Leave at least two dimensions for each subspace still to come.
        if (pool.size() < next + 2 * left + 2) {
            throw ConfigError("cannot place " + std::to_string(count) +
                              " disjoint subspaces in d=" + std::to_string(cfg.dims));
        }
        const std::size_t room = pool.size() - next - 2 * left;
        const std::size_t size = uniform_size(2, std::min(cfg.max_subspace_dim, room), rng);
        std::vector<std::size_t> dims(pool.begin() + static_cast<long>(next),
                                      pool.begin() + static_cast<long>(next + size));
        next += size;
        out.push_back({Subspace(std::move(dims)), uniform_in(cfg.delta_min, cfg.delta_max, rng)});
    }
    return out;
}

DistributionSpec next_distribution(const DistributionSpec& prev, const GeneratorConfig& cfg,
                                   SplitMix64& rng) {
    const std::size_t k = cfg.subspaces_per_distribution();
    std::vector<bool> used(cfg.dims, false);
    for (const auto& p : prev.subspaces) {
        for (auto dim : p.dims.dims()) used[dim] = true;
    }

    if (prev.subspaces.empty()) {
        std::vector<std::size_t> all(cfg.dims);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return {draw_subspaces(k, std::move(all), {}, cfg, rng)};
    }

    // Replace half of the subspaces, rounding up.
    const std::size_t replace = (prev.subspaces.size() + 1) / 2;
    std::vector<std::size_t> order(prev.subspaces.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);

    DistributionSpec next;
    std::vector<std::size_t> freed;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto& p = prev.subspaces[order[j]];
        if (j < replace) {
            freed.insert(freed.end(), p.dims.dims().begin(), p.dims.dims().end());
        } else {
            next.subspaces.push_back(p);
        }
    }
    std::vector<std::size_t> unused;
    for (std::size_t dim = 0; dim < cfg.dims; ++dim) {
        if (!used[dim]) unused.push_back(dim);
    }
    std::sort(freed.begin(), freed.end());
    auto fresh = draw_subspaces(replace, std::move(unused), std::move(freed), cfg, rng);
    next.subspaces.insert(next.subspaces.end(), fresh.begin(), fresh.end());
    std::sort(next.subspaces.begin(), next.subspaces.end(),
              [](const PlantedSubspace& a, const PlantedSubspace& b) { return a.dims < b.dims; });
    return next;
}

void sample_point(const DistributionSpec& dist, double per_subspace_prob, std::size_t d,
                  SplitMix64& rng, Observation& obs) {
    obs.values.resize(d);
    for (auto& v : obs.values) v = rng.uniform();
    bool outlier = false;
    for (const auto& p : dist.subspaces) {
        const auto dims = p.dims.dims();
        if (per_subspace_prob > 0.0 && rng.uniform() < per_subspace_prob) {
            for (auto dim : dims) obs.values[dim] = uniform_in(p.delta, 1.0, rng);
            outlier = true;
        } else {
            const auto x = complement_sample(p.delta, dims.size(), rng);
            for (std::size_t j = 0; j < dims.size(); ++j) obs.values[dims[j]] = x[j];
        }
    }
    obs.label = outlier;
}

}  // namespace

GeneratedStream generate(const GeneratorConfig& cfg) {
    cfg.validate();
    SplitMix64 rng(substream(cfg.seed, "generator"));

    GeneratedStream out;
    out.distributions.push_back({});
    for (std::size_t i = 1; i <= cfg.phases; ++i) {
        out.distributions.push_back(next_distribution(out.distributions.back(), cfg, rng));
    }

    const double q = cfg.per_subspace_prob();
    const std::size_t total = cfg.phases * cfg.per_phase;
    out.observations.reserve(total);
    out.source.reserve(total);
    for (std::size_t i = 0; i < cfg.phases; ++i) {
        for (std::size_t j = 0; j < cfg.per_phase; ++j) {
            const double drift = static_cast<double>(j) / static_cast<double>(cfg.per_phase);
            const std::size_t from = rng.uniform() < drift ? i + 1 : i;
            Observation obs;
            obs.time_index = out.observations.size() + 1;
            sample_point(out.distributions[from], q, cfg.dims, rng, obs);
            out.observations.push_back(std::move(obs));
            out.source.push_back(static_cast<std::uint32_t>(from));
        }
    }
    return out;
}

namespace {

void append_double(std::string& s, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    s.append(buf, res.ptr);
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, const GeneratedStream& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    const std::size_t d = data.observations.empty() ? 0 : data.observations.front().values.size();
    std::string line;
    for (std::size_t i = 0; i < d; ++i) line += "dim_" + std::to_string(i) + ",";
    line += "label\n";
    out << line;
    for (const auto& obs : data.observations) {
        line.clear();
        for (double v : obs.values) {
            append_double(line, v);
            line += ',';
        }
        line += obs.label.value_or(false) ? "1\n" : "0\n";
        out << line;
    }
    if (!out) throw DataError("failed writing " + path.string());
}

std::string spec_json(const GeneratorConfig& cfg, const GeneratedStream& data) {
    nlohmann::ordered_json j;
    j["dims"] = cfg.dims;
    j["phases"] = cfg.phases;
    j["per_phase"] = cfg.per_phase;
    j["outlier_prob"] = cfg.outlier_prob;
    j["per_subspace_prob"] = cfg.per_subspace_prob();
    j["max_subspace_dim"] = cfg.max_subspace_dim;
    j["seed"] = cfg.seed;
    std::size_t outliers = 0;
    for (const auto& obs : data.observations) outliers += obs.label.value_or(false) ? 1 : 0;
    j["observations"] = data.observations.size();
    j["outliers"] = outliers;
    auto& dists = j["distributions"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < data.distributions.size(); ++i) {
        nlohmann::ordered_json dj;
        dj["index"] = i;
        dj["subspaces"] = nlohmann::ordered_json::array();
        for (const auto& p : data.distributions[i].subspaces) {
            dj["subspaces"].push_back(
                {{"dims", std::vector<std::size_t>(p.dims.dims().begin(), p.dims.dims().end())},
                 {"delta", p.delta}});
        }
        dists.push_back(std::move(dj));
    }
    return j.dump(2) + "\n";
}

}  // namespace sgmrd
