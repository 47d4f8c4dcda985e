#include "sgmrd/lof.hpp"

#include "sgmrd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgmrd {

namespace {

struct Neighbor {
    double dist;
    std::size_t index;
};

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
    }
    return std::sqrt(s);
}

// For every point, all other points up to and including the k_max-distance,
// ascending by (distance, index).
std::vector<std::vector<Neighbor>> neighbor_lists(const Matrix& points, std::size_t k_max) {
    const std::size_t n = points.rows;
    std::vector<std::vector<Neighbor>> lists(n);
    std::vector<double> row(n);
    std::vector<double> scratch;
    for (std::size_t a = 0; a < n; ++a) {
        scratch.clear();
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a) continue;
            row[b] = distance(points.row(a), points.row(b));
            scratch.push_back(row[b]);
        }
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<long>(k_max - 1),
                         scratch.end());
        const double cutoff = scratch[k_max - 1];
        auto& list = lists[a];
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a && row[b] <= cutoff) list.push_back({row[b], b});
        }
        std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) {
            return x.dist < y.dist || (x.dist == y.dist && x.index < y.index);
        });
    }
    return lists;
}

std::vector<double> lof_from_lists(const std::vector<std::vector<Neighbor>>& lists, std::size_t k) {
    const std::size_t n = lists.size();
    std::vector<double> kdist(n);
    std::vector<std::size_t> hood(n);  // neighbourhood size, ties included
    for (std::size_t a = 0; a < n; ++a) {
        const auto& list = lists[a];
        kdist[a] = list[k - 1].dist;
        std::size_t m = k;
        while (m < list.size() && list[m].dist <= kdist[a]) ++m;
        hood[a] = m;
    }

    std::vector<double> lrd(n);
    for (std::size_t a = 0; a < n; ++a) {
        double reach = 0.0;
        for (std::size_t j = 0; j < hood[a]; ++j) {
            const auto& nb = lists[a][j];
            reach += std::max(kdist[nb.index], nb.dist);
        }
        lrd[a] = 1.0 / (reach / static_cast<double>(hood[a]) + kLofDensityEpsilon);
    }

    std::vector<double> out(n);
    for (std::size_t a = 0; a < n; ++a) {
        double ratio = 0.0;
        for (std::size_t j = 0; j < hood[a]; ++j) ratio += lrd[lists[a][j].index];
        out[a] = ratio / static_cast<double>(hood[a]) / lrd[a];
    }
    return out;
}

}  // namespace

std::vector<std::vector<double>> lof_multi(const Matrix& points, std::span<const std::size_t> ks) {
    if (points.cols == 0) throw ShapeError("LOF needs at least one column");
    if (ks.empty()) return {};
    const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
    for (auto k : ks) {
        if (k < 1) throw ConfigError("LOF needs k >= 1");
    }
    if (points.rows <= k_max) {
        throw ShapeError("LOF with k=" + std::to_string(k_max) + " needs more than " +
                         std::to_string(k_max) + " points, got " + std::to_string(points.rows));
    }
    const auto lists = neighbor_lists(points, k_max);
    std::vector<std::vector<double>> out;
    out.reserve(ks.size());
    for (auto k : ks) out.push_back(lof_from_lists(lists, k));
    return out;
}

std::vector<double> lof(const Matrix& points, std::size_t k) {
    const std::size_t ks[] = {k};
    return std::move(lof_multi(points, ks).front());
}

}  // namespace sgmrd
