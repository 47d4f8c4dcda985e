#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgmrd {

struct Observation {
    std::vector<double> values;
    std::uint64_t time_index = 0;  // 1-based arrival order
    std::optional<bool> label;     // true = ground-truth outlier
};

// Sorted, duplicate-free set of dimension indices.
class Subspace {
public:
    Subspace() = default;
    Subspace(std::initializer_list<std::size_t> dims);
    explicit Subspace(std::vector<std::size_t> dims);

    static Subspace full(std::size_t d);

    std::span<const std::size_t> dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return dims_.size(); }
    bool empty() const noexcept { return dims_.empty(); }
    bool contains(std::size_t dim) const noexcept;
    std::size_t max_dim() const noexcept { return dims_.empty() ? 0 : dims_.back(); }

    Subspace with(std::size_t dim) const;

    std::string to_string() const;

    auto operator<=>(const Subspace&) const = default;

private:
    std::vector<std::size_t> dims_;
};

// Entry i is the subspace currently assigned to dimension i; it always contains i.
class SubspaceMap {
public:
    SubspaceMap() = default;
    explicit SubspaceMap(std::vector<Subspace> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    const Subspace& operator[](std::size_t i) const { return entries_[i]; }
    const Subspace& at(std::size_t i) const;
    void assign(std::size_t i, Subspace s);
    std::span<const Subspace> entries() const noexcept { return entries_; }

    bool operator==(const SubspaceMap&) const = default;

private:
    std::vector<Subspace> entries_;
};

// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// The w most recent observations plus, per dimension, the positions of the
// buffer sorted by value. Ties are ordered by arrival (stable).
class SlidingWindow {
public:
    struct RankEntry {
        double value;
        std::uint64_t seq;
    };

    SlidingWindow(std::size_t dims, std::size_t capacity);

    // Appends obs, evicting the oldest observation once capacity is exceeded.
    // Throws ShapeError on a dimension mismatch and DataError on non-finite values.
    void push(Observation obs);

    std::size_t dims() const noexcept { return dims_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return buffer_.size(); }
    bool empty() const noexcept { return buffer_.empty(); }
    bool full() const noexcept { return buffer_.size() == capacity_; }

    // Buffer position 0 is the oldest observation.
    const Observation& at(std::size_t pos) const { return buffer_.at(pos); }
    double value(std::size_t pos, std::size_t dim) const { return buffer_[pos].values[dim]; }
    const std::deque<Observation>& buffer() const noexcept { return buffer_; }

    // Buffer positions ordered by ascending value of `dim`.
    std::span<const std::uint32_t> rank_index(std::size_t dim) const { return rank_index_.at(dim); }
    // Inverse of rank_index: rank of each buffer position in `dim`.
    std::span<const std::uint32_t> ranks(std::size_t dim) const { return ranks_.at(dim); }
    // Column values in ascending order (same order as rank_index).
    std::span<const RankEntry> sorted(std::size_t dim) const { return sorted_.at(dim); }

private:
    void rebuild_index(std::size_t dim);

    std::size_t dims_;
    std::size_t capacity_;
    std::deque<Observation> buffer_;
    std::uint64_t front_seq_ = 0;
    std::uint64_t next_seq_ = 0;
    std::vector<std::vector<RankEntry>> sorted_;
    std::vector<std::vector<std::uint32_t>> rank_index_;
    std::vector<std::vector<std::uint32_t>> ranks_;
};

// Columns of the buffer restricted to the subspace dims, row order preserved.
Matrix project(const SlidingWindow& window, const Subspace& subspace);
Matrix project(std::span<const Observation> rows, const Subspace& subspace);

struct CsvStream {
    std::vector<std::string> columns;  // value columns, label excluded
    std::vector<Observation> observations;
};

// Reads a headered, comma-separated numeric file. The label column, if
// named, must hold 0/1 and is moved into Observation::label.
CsvStream read_csv_stream(const std::filesystem::path& path,
                          const std::optional<std::string>& label_column = std::nullopt);

}  // namespace sgmrd
