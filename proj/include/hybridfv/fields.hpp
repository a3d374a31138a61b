#pragma once

#include "hybridfv/grid.hpp"

#include <array>
#include <vector>

namespace hybridfv {

/// Face-centered data, one array per axis sized grid.face_count(axis).
struct FaceField {
    std::array<Field, 3> comp;
};

FaceField make_face_field(const StructuredGrid& g);

/// All transported and derived fields at one time level.
struct FieldState {
    std::array<Field, 3> u;  ///< cell-centered velocity components, m/s
    Field T;                 ///< temperature, K
    Field p;                 ///< kinematic gauge pressure, m^2/s^2
    Field rho;               ///< density, kg/m^3
    FaceField phi;           ///< volumetric face flux, m^3/s
    double time = 0.0;       ///< s
};

FieldState make_state(const StructuredGrid& g);

bool state_shape_ok(const StructuredGrid& g, const FieldState& s);
bool state_finite(const StructuredGrid& g, const FieldState& s);

struct ProbeReading {
    std::array<double, 3> u{0, 0, 0};
    double T = 0.0;
};

/// Nearest-cell sampling of (u, T) at physical points.
/// Throws std::out_of_range for points outside the domain.
std::vector<ProbeReading> probe_sample(const StructuredGrid& g,
                                       const FieldState& s,
                                       const std::vector<std::array<double, 3>>& points);

/// Default monitoring layout: six points on the vertical centerline,
/// three near the top wall and three near the bottom.
std::vector<std::array<double, 3>> default_probe_points(const StructuredGrid& g);

}  // namespace hybridfv
