#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace hybridfv {

using Field = std::vector<double>;

/// Uniform Cartesian cell grid with 2 or 3 axes. Cell data is stored
/// row-major with x fastest; unused axes have extent 1.
struct StructuredGrid {
    int axes = 2;
    std::array<int, 3> dims{1, 1, 1};        ///< cells per axis
    std::array<double, 3> spacing{1, 1, 1};  ///< m per cell
    std::array<double, 3> origin{0, 0, 0};   ///< m, low corner of the domain

    long cell_count() const {
        return static_cast<long>(dims[0]) * dims[1] * dims[2];
    }
    double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    long cell_index(int i, int j, int k = 0) const {
        return (static_cast<long>(k) * dims[1] + j) * dims[0] + i;
    }

    /// Number of faces normal to `axis` (dims[axis]+1 layers).
    long face_count(int axis) const {
        long n = 1;
        for (int a = 0; a < 3; ++a) n *= (a == axis) ? dims[a] + 1 : dims[a];
        return n;
    }

    /// Index into the face array for `axis`; the index along `axis` runs 0..dims[axis].
    long face_index(int axis, int i, int j, int k = 0) const {
        const long nx = (axis == 0) ? dims[0] + 1 : dims[0];
        const long ny = (axis == 1) ? dims[1] + 1 : dims[1];
        return (static_cast<long>(k) * ny + j) * nx + i;
    }

    /// Area of a face normal to `axis`.
    double face_area(int axis) const {
        double a = 1;
        for (int ax = 0; ax < 3; ++ax)
            if (ax != axis) a *= spacing[ax];
        return a;
    }

    std::array<double, 3> cell_center(int i, int j, int k = 0) const {
        return {origin[0] + (i + 0.5) * spacing[0],
                origin[1] + (j + 0.5) * spacing[1],
                origin[2] + (k + 0.5) * spacing[2]};
    }

    double length(int axis) const { return dims[axis] * spacing[axis]; }

    bool contains(const std::array<double, 3>& p) const {
        for (int a = 0; a < axes; ++a)
            if (p[a] < origin[a] || p[a] > origin[a] + length(a)) return false;
        return true;
    }
};

/// Builds a grid from per-axis cell counts and domain lengths.
/// Throws std::invalid_argument for extents < 3 or nonpositive lengths.
StructuredGrid make_grid(const std::vector<int>& extents,
                         const std::vector<double>& lengths,
                         const std::array<double, 3>& origin = {0, 0, 0});

enum class BcKind { Dirichlet, NeumannZero };

struct FaceBc {
    BcKind kind = BcKind::NeumannZero;
    double value = 0.0;
};

/// Wall faces in pass order: x before y before z, low before high.
enum Face : int { XLo = 0, XHi, YLo, YHi, ZLo, ZHi };

/// One condition per wall face of a single transported field.
using FieldBc = std::array<FaceBc, 6>;

inline FieldBc uniform_dirichlet(double value) {
    FieldBc bc;
    for (auto& f : bc) f = {BcKind::Dirichlet, value};
    return bc;
}

inline FieldBc all_neumann() { return FieldBc{}; }

/// Transported variables in feature order. 2D uses Ux, Uy, Temp.
enum class Var : int { Ux = 0, Uy = 1, Uz = 2, Temp = 3 };

/// Wall conditions for the cavity problem: no-slip velocity everywhere,
/// hot x-lo wall, cold x-hi wall, adiabatic y (and z) walls.
struct BoundarySpec {
    std::array<FieldBc, 3> velocity{};
    FieldBc temperature{};

    const FieldBc& for_var(Var v) const {
        return v == Var::Temp ? temperature : velocity[static_cast<int>(v)];
    }
};

BoundarySpec cavity_boundaries(double t_hot, double t_cold, int axes);

/// Index into an array padded by one ghost layer per side; i,j,k in -1..dims[a].
inline long padded_index(const StructuredGrid& g, int i, int j, int k = -1) {
    const long px = g.dims[0] + 2;
    const long py = g.dims[1] + 2;
    const int kk = (g.axes == 2) ? -1 : k;
    return ((static_cast<long>(kk) + 1) * py + (j + 1)) * px + (i + 1);
}

inline long padded_size(const StructuredGrid& g) {
    long n = 1;
    for (int a = 0; a < g.axes; ++a) n *= g.dims[a] + 2;
    return n;
}

/// Embeds a cell field into a ghost-padded array (each used extent +2).
/// NeumannZero faces copy the adjacent layer; Dirichlet faces are filled
/// last over the full extended range, so shared edges take Dirichlet values.
Field pad_with_boundaries(const StructuredGrid& g, const Field& cells,
                          const FieldBc& bc);

}  // namespace hybridfv
