#pragma once

#include "sgmrd/engine.hpp"
#include "sgmrd/ensemble.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgmrd {

// JSON-lines snapshot format, one object per step:
// {"t":..,"subspaces":[[dims..],..],"qualities":[..],"selected":[..],"successes":[..],"evaluations":..}
std::string snapshot_json_line(const Snapshot& snap);
Snapshot parse_snapshot_line(std::string_view line);
std::vector<Snapshot> read_snapshots(const std::filesystem::path& path);

// Score CSV with header "t,score" or "t,score,label".
void write_scores_csv(std::ostream& out, std::span<const ScoreRecord> records);
void write_scores_csv(const std::filesystem::path& path, std::span<const ScoreRecord> records);
std::vector<ScoreRecord> read_scores_csv(const std::filesystem::path& path);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace sgmrd
