#include "sgmrd/io.hpp"

#include "sgmrd/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace sgmrd {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string snapshot_json_line(const Snapshot& snap) {
    nlohmann::ordered_json j;
    j["t"] = snap.t;
    auto& subs = j["subspaces"] = nlohmann::ordered_json::array();
    for (const auto& s : snap.subspaces.entries()) {
        subs.push_back(std::vector<std::size_t>(s.dims().begin(), s.dims().end()));
    }
    j["qualities"] = snap.qualities;
    j["selected"] = snap.selected;
    j["successes"] = snap.successes;
    j["evaluations"] = snap.evaluations;
    return j.dump();
}

Snapshot parse_snapshot_line(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        Snapshot snap;
        snap.t = j.at("t").get<std::uint64_t>();
        std::vector<Subspace> entries;
        for (const auto& dims : j.at("subspaces")) {
            entries.emplace_back(dims.get<std::vector<std::size_t>>());
        }
        snap.subspaces = SubspaceMap(std::move(entries));
        snap.qualities = j.at("qualities").get<std::vector<double>>();
        snap.selected = j.at("selected").get<std::vector<std::size_t>>();
        snap.successes = j.at("successes").get<std::vector<bool>>();
        if (j.contains("evaluations")) snap.evaluations = j["evaluations"].get<std::uint64_t>();
        if (snap.qualities.size() != snap.subspaces.size() ||
            snap.successes.size() != snap.selected.size()) {
            throw ShapeError("inconsistent snapshot lengths at t=" + std::to_string(snap.t));
        }
        return snap;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed snapshot line: ") + e.what());
    }
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open snapshot file: " + path.string());
    std::vector<Snapshot> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_snapshot_line(line));
    }
    return out;
}

void write_scores_csv(std::ostream& out, std::span<const ScoreRecord> records) {
    bool labelled = !records.empty();
    for (const auto& r : records) labelled = labelled && r.label.has_value();
    out << (labelled ? "t,score,label\n" : "t,score\n");
    for (const auto& r : records) {
        out << r.time_index << ',' << format_double(r.score);
        if (labelled) out << ',' << (*r.label ? 1 : 0);
        out << '\n';
    }
}

void write_scores_csv(const std::filesystem::path& path, std::span<const ScoreRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_scores_csv(out, records);
    if (!out) throw DataError("failed writing " + path.string());
}

std::vector<ScoreRecord> read_scores_csv(const std::filesystem::path& path) {
    const auto csv = read_csv_stream(path);
    const auto& cols = csv.columns;
    auto find = [&](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (cols[c] == name) return static_cast<std::ptrdiff_t>(c);
        }
        return -1;
    };
    const auto tc = find("t");
    const auto sc = find("score");
    const auto lc = find("label");
    if (tc < 0 || sc < 0) throw DataError("score file needs columns t and score: " + path.string());
    std::vector<ScoreRecord> out;
    out.reserve(csv.observations.size());
    for (const auto& obs : csv.observations) {
        ScoreRecord r;
        r.time_index = static_cast<std::uint64_t>(obs.values[static_cast<std::size_t>(tc)]);
        r.score = obs.values[static_cast<std::size_t>(sc)];
        if (lc >= 0) {
            const double l = obs.values[static_cast<std::size_t>(lc)];
            if (l != 0.0 && l != 1.0) throw DataError("label must be 0 or 1 in " + path.string());
            r.label = l == 1.0;
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace sgmrd
