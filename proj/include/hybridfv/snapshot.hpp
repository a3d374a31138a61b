#pragma once

#include "hybridfv/fields.hpp"
#include "hybridfv/grid.hpp"

#include <string>
#include <vector>

namespace hybridfv {

/// Snapshot payload: extents identify the grid the state belongs to.
struct SnapshotData {
    int axes = 2;
    std::array<int, 3> extents{1, 1, 1};
    double time = 0;
    double dt = 0;
    FieldState state;
};

/// Binary field snapshot, magic "XRPT": header with format version, axis
/// count, extents, the field roster (name, cell/face kind, components),
/// time and dt, then each field as little-endian 64-bit floats row-major in
/// roster order. Written atomically via a ".partial" temporary.
void write_snapshot(const StructuredGrid& g, const FieldState& state, double dt,
                    const std::string& path);

/// Throws std::runtime_error on bad magic, unsupported version, truncation
/// or payload shape mismatch.
SnapshotData read_snapshot(const std::string& path);

/// Reads a snapshot and validates it against the expected grid.
FieldState read_snapshot_for_grid(const StructuredGrid& g, const std::string& path);

/// Lists "step_*.snap" files in a directory sorted by step index.
std::vector<std::pair<long, std::string>> list_snapshots(const std::string& dir);

std::string snapshot_filename(long step);

}  // namespace hybridfv
