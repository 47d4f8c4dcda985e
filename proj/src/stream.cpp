#include "sgmrd/stream.hpp"

#include "sgmrd/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace sgmrd {

Subspace::Subspace(std::initializer_list<std::size_t> dims)
    : Subspace(std::vector<std::size_t>(dims)) {}

Subspace::Subspace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
        throw ShapeError("subspace must contain at least one dimension");
    }
    std::sort(dims_.begin(), dims_.end());
    if (std::adjacent_find(dims_.begin(), dims_.end()) != dims_.end()) {
        throw ShapeError("subspace contains duplicate dimensions: " + to_string());
    }
}

Subspace Subspace::full(std::size_t d) {
    std::vector<std::size_t> all(d);
    for (std::size_t i = 0; i < d; ++i) all[i] = i;
    return Subspace(std::move(all));
}

bool Subspace::contains(std::size_t dim) const noexcept {
    return std::binary_search(dims_.begin(), dims_.end(), dim);
}

Subspace Subspace::with(std::size_t dim) const {
    if (contains(dim)) return *this;
    auto dims = dims_;
    dims.insert(std::upper_bound(dims.begin(), dims.end(), dim), dim);
    Subspace out;
    out.dims_ = std::move(dims);
    return out;
}

std::string Subspace::to_string() const {
    std::string out = "{";
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (k) out += ",";
        out += std::to_string(dims_[k]);
    }
    return out + "}";
}

SubspaceMap::SubspaceMap(std::vector<Subspace> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!entries_[i].contains(i)) {
            throw ShapeError("subspace map entry " + std::to_string(i) + " = " +
                             entries_[i].to_string() + " does not contain its own dimension");
        }
    }
}

const Subspace& SubspaceMap::at(std::size_t i) const {
    if (i >= entries_.size()) {
        throw IndexError("subspace map index " + std::to_string(i) + " out of range");
    }
    return entries_[i];
}

void SubspaceMap::assign(std::size_t i, Subspace s) {
    if (i >= entries_.size()) {
        throw IndexError("subspace map index " + std::to_string(i) + " out of range");
    }
    if (!s.contains(i)) {
        throw ShapeError("subspace " + s.to_string() + " cannot be assigned to dimension " +
                         std::to_string(i));
    }
    entries_[i] = std::move(s);
}

SlidingWindow::SlidingWindow(std::size_t dims, std::size_t capacity)
    : dims_(dims), capacity_(capacity), sorted_(dims), rank_index_(dims), ranks_(dims) {
    if (dims == 0) throw ConfigError("window needs at least one dimension");
    if (capacity == 0) throw ConfigError("window capacity must be positive");
    for (auto& s : sorted_) s.reserve(capacity + 1);
}

void SlidingWindow::push(Observation obs) {
    if (obs.values.size() != dims_) {
        throw ShapeError("observation has " + std::to_string(obs.values.size()) +
                         " values, stream has " + std::to_string(dims_) + " dimensions");
    }
    for (std::size_t i = 0; i < dims_; ++i) {
        if (!std::isfinite(obs.values[i])) {
            throw DataError("non-finite value in dimension " + std::to_string(i) +
                            " at t=" + std::to_string(obs.time_index));
        }
    }

    const auto by_value_then_seq = [](const RankEntry& a, const RankEntry& b) {
        return a.value < b.value || (a.value == b.value && a.seq < b.seq);
    };

    const std::uint64_t seq = next_seq_++;
    for (std::size_t i = 0; i < dims_; ++i) {
        auto& col = sorted_[i];
        const RankEntry e{obs.values[i], seq};
        // seq is the largest so far, so it goes after every equal value.
        col.insert(std::upper_bound(col.begin(), col.end(), e, by_value_then_seq), e);
    }
    buffer_.push_back(std::move(obs));

    if (buffer_.size() > capacity_) {
        const Observation& oldest = buffer_.front();
        for (std::size_t i = 0; i < dims_; ++i) {
            auto& col = sorted_[i];
            const RankEntry e{oldest.values[i], front_seq_};
            col.erase(std::lower_bound(col.begin(), col.end(), e, by_value_then_seq));
        }
        buffer_.pop_front();
        ++front_seq_;
    }

    for (std::size_t i = 0; i < dims_; ++i) rebuild_index(i);
}

void SlidingWindow::rebuild_index(std::size_t dim) {
    const auto& col = sorted_[dim];
    auto& order = rank_index_[dim];
    auto& rank = ranks_[dim];
    order.resize(col.size());
    rank.resize(col.size());
    for (std::size_t k = 0; k < col.size(); ++k) {
        const auto pos = static_cast<std::uint32_t>(col[k].seq - front_seq_);
        order[k] = pos;
        rank[pos] = static_cast<std::uint32_t>(k);
    }
}

namespace {

void check_dims(const Subspace& subspace, std::size_t d) {
    if (subspace.empty()) throw ShapeError("cannot project onto an empty subspace");
    if (subspace.max_dim() >= d) {
        throw IndexError("subspace " + subspace.to_string() + " out of range for d=" +
                         std::to_string(d));
    }
}

}  // namespace

Matrix project(const SlidingWindow& window, const Subspace& subspace) {
    check_dims(subspace, window.dims());
    Matrix m{window.size(), subspace.size(), {}};
    m.data.reserve(m.rows * m.cols);
    for (const auto& obs : window.buffer()) {
        for (auto dim : subspace.dims()) m.data.push_back(obs.values[dim]);
    }
    return m;
}

Matrix project(std::span<const Observation> rows, const Subspace& subspace) {
    Matrix m{rows.size(), subspace.size(), {}};
    if (rows.empty()) return m;
    check_dims(subspace, rows.front().values.size());
    m.data.reserve(m.rows * m.cols);
    for (const auto& obs : rows) {
        for (auto dim : subspace.dims()) m.data.push_back(obs.values[dim]);
    }
    return m;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

CsvStream read_csv_stream(const std::filesystem::path& path,
                          const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("input file has no header row: " + path.string());
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    std::vector<std::string> header;
    for (auto cell : split(line)) header.push_back(unquote(cell));

    std::optional<std::size_t> label_idx;
    if (label_column) {
        const auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) {
            throw DataError("label column '" + *label_column + "' not found in header of " +
                            path.string());
        }
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    CsvStream out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_idx) out.columns.push_back(header[c]);
    }

    std::uint64_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(header.size()));
        }
        Observation obs;
        obs.time_index = row;
        obs.values.reserve(out.columns.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                throw DataError("non-numeric cell '" + std::string(cells[c]) + "' at row " +
                                std::to_string(row) + ", column " + header[c]);
            }
            if (c == label_idx) {
                if (v != 0.0 && v != 1.0) {
                    throw DataError("label must be 0 or 1 at row " + std::to_string(row) +
                                    ", column " + header[c]);
                }
                obs.label = (v == 1.0);
            } else {
                obs.values.push_back(v);
            }
        }
        out.observations.push_back(std::move(obs));
    }
    return out;
}

}  // namespace sgmrd
