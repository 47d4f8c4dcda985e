#include "sgmrd/error.hpp"
#include "sgmrd/rng.hpp"
#include "sgmrd/stream.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

using namespace sgmrd;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("sgmrd_test_" + name);
    std::ofstream(path) << content;
    return path;
}

// Stable argsort of one column, i.e. what rank_index must equal.
std::vector<std::uint32_t> argsort(const SlidingWindow& w, std::size_t dim) {
    std::vector<std::uint32_t> order(w.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return w.value(a, dim) < w.value(b, dim);
    });
    return order;
}

}  // namespace

TEST_CASE("subspace") {
    const Subspace s{3, 1, 2};
    CHECK(s.size() == 3);
    CHECK(s.dims()[0] == 1);
    CHECK(s.contains(2));
    CHECK_FALSE(s.contains(0));
    CHECK(s.to_string() == "{1,2,3}");
    CHECK(s.with(0).to_string() == "{0,1,2,3}");
    CHECK(s.with(2) == s);
    CHECK(Subspace::full(3).to_string() == "{0,1,2}");
    CHECK(Subspace{0, 1} < Subspace{0, 2});
    CHECK_THROWS_AS(Subspace(std::vector<std::size_t>{}), ShapeError);
    CHECK_THROWS_AS((Subspace{1, 1}), ShapeError);
}

TEST_CASE("subspace map keeps every dimension in its own entry") {
    SubspaceMap m({Subspace{0, 1}, Subspace{1}, Subspace{0, 2}});
    CHECK(m.size() == 3);
    m.assign(1, Subspace{1, 2});
    CHECK(m[1].to_string() == "{1,2}");
    CHECK_THROWS_AS(m.assign(0, Subspace{1, 2}), ShapeError);
    CHECK_THROWS_AS(m.assign(5, Subspace{5}), IndexError);
    CHECK_THROWS_AS(m.at(3), IndexError);
    CHECK_THROWS_AS(SubspaceMap({Subspace{1}}), ShapeError);
}

TEST_CASE("sliding window keeps the w most recent observations") {
    SlidingWindow w(2, 3);
    CHECK(w.empty());
    for (std::uint64_t t = 1; t <= 5; ++t) {
        w.push({{static_cast<double>(t), -static_cast<double>(t)}, t, {}});
        CHECK(w.size() == std::min<std::size_t>(t, 3));
    }
    CHECK(w.full());
    CHECK(w.at(0).time_index == 3);
    CHECK(w.at(2).time_index == 5);
    CHECK(w.rank_index(0)[0] == 0);
    CHECK(w.rank_index(1)[0] == 2);
    CHECK(w.ranks(1)[0] == 2);
}

TEST_CASE("rank index equals a full stable re-sort after every push") {
    SplitMix64 rng(7);
    for (std::size_t capacity : {1, 2, 5, 50}) {
        SlidingWindow w(3, capacity);
        for (std::uint64_t t = 1; t <= 200; ++t) {
            // coarse values in dim 1 force ties
            w.push({{rng.uniform(), std::floor(rng.uniform() * 4), static_cast<double>(t % 3)}, t, {}});
            for (std::size_t dim = 0; dim < 3; ++dim) {
                const auto expected = argsort(w, dim);
                const auto got = w.rank_index(dim);
                REQUIRE(std::equal(got.begin(), got.end(), expected.begin(), expected.end()));
                for (std::size_t k = 0; k < w.size(); ++k) {
                    CHECK(w.ranks(dim)[got[k]] == k);
                    CHECK(w.sorted(dim)[k].value == w.value(got[k], dim));
                }
            }
        }
    }
}

TEST_CASE("window rejects bad observations") {
    SlidingWindow w(2, 4);
    CHECK_THROWS_AS(w.push({{1.0}, 1, {}}), ShapeError);
    CHECK_THROWS_AS(w.push({{1.0, std::numeric_limits<double>::quiet_NaN()}, 1, {}}), DataError);
    CHECK_THROWS_AS(w.push({{1.0, std::numeric_limits<double>::infinity()}, 1, {}}), DataError);
    CHECK(w.empty());
    CHECK_THROWS_AS(SlidingWindow(2, 0), ConfigError);
    CHECK_THROWS_AS(SlidingWindow(0, 2), ConfigError);
}

TEST_CASE("projection") {
    SlidingWindow w(3, 2);
    w.push({{1, 2, 3}, 1, {}});
    w.push({{4, 5, 6}, 2, {}});
    const auto m = project(w, {0, 2});
    CHECK(m.rows == 2);
    CHECK(m.cols == 2);
    CHECK(m(1, 0) == 4);
    CHECK(m(1, 1) == 6);
    CHECK_THROWS_AS(project(w, {0, 3}), IndexError);

    std::vector<Observation> rows{{{1, 2, 3}, 1, {}}};
    CHECK(project(rows, {1}).data == std::vector<double>{2});
}

TEST_CASE("csv ingestion") {
    SUBCASE("values and label") {
        const auto path = temp_file("ok.csv", "a,b,label\n1,2.5,0\n\n-3,4e2,1\n");
        const auto csv = read_csv_stream(path, std::string("label"));
        CHECK(csv.columns == std::vector<std::string>{"a", "b"});
        REQUIRE(csv.observations.size() == 2);
        CHECK(csv.observations[1].values == std::vector<double>{-3, 400});
        CHECK(csv.observations[1].label == true);
        CHECK(csv.observations[1].time_index == 2);
        const auto unlabelled = read_csv_stream(path);
        CHECK(unlabelled.columns.size() == 3);
        CHECK_FALSE(unlabelled.observations[0].label.has_value());
    }
    SUBCASE("errors name the row and column") {
        const auto path = temp_file("bad.csv", "a,b\n1,2\n3,x\n");
        try {
            read_csv_stream(path);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 2") != std::string::npos);
            CHECK(msg.find("column b") != std::string::npos);
        }
        CHECK_THROWS_AS(read_csv_stream(temp_file("nan.csv", "a\nnan\n")), DataError);
        CHECK_THROWS_AS(read_csv_stream(temp_file("short.csv", "a,b\n1\n")), DataError);
        CHECK_THROWS_AS(read_csv_stream(temp_file("lab.csv", "a,y\n1,2\n"), std::string("y")), DataError);
        CHECK_THROWS_AS(read_csv_stream(temp_file("lab2.csv", "a\n1\n"), std::string("y")), DataError);
        CHECK_THROWS_AS(read_csv_stream("/nonexistent/file.csv"), DataError);
    }
}
