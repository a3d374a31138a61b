#include "hybridfv/grid.hpp"

#include <stdexcept>

namespace hybridfv {

StructuredGrid make_grid(const std::vector<int>& extents,
                         const std::vector<double>& lengths,
                         const std::array<double, 3>& origin) {
    if (extents.size() != lengths.size() ||
        (extents.size() != 2 && extents.size() != 3))
        throw std::invalid_argument("grid: need 2 or 3 axes with matching lengths");
    StructuredGrid g;
    g.axes = static_cast<int>(extents.size());
    g.origin = origin;
    for (int a = 0; a < g.axes; ++a) {
        if (extents[a] < 3)
            throw std::invalid_argument("grid: extent < 3 on axis " + std::to_string(a));
        if (lengths[a] <= 0)
            throw std::invalid_argument("grid: nonpositive length on axis " + std::to_string(a));
        g.dims[a] = extents[a];
        g.spacing[a] = lengths[a] / extents[a];
    }
    return g;
}

BoundarySpec cavity_boundaries(double t_hot, double t_cold, int axes) {
    BoundarySpec spec;
    for (int c = 0; c < 3; ++c) spec.velocity[c] = uniform_dirichlet(0.0);
    spec.temperature = all_neumann();
    spec.temperature[XLo] = {BcKind::Dirichlet, t_hot};
    spec.temperature[XHi] = {BcKind::Dirichlet, t_cold};
    (void)axes;  // z walls stay adiabatic / no-slip
    return spec;
}

namespace {

// Iterates one ghost plane of the padded array together with its source
// plane. `axis` is the face normal, `side` 0 for the low wall.
template <typename F>
void for_each_ghost(const StructuredGrid& g, int axis, int side, F&& fn) {
    const int ghost = side == 0 ? -1 : g.dims[axis];
    const int inner = side == 0 ? 0 : g.dims[axis] - 1;
    int lo[3] = {-1, -1, -1}, hi[3] = {g.dims[0], g.dims[1], g.dims[2]};
    if (g.axes == 2) { lo[2] = 0; hi[2] = 0; }
    lo[axis] = hi[axis] = 0;  // replaced per point below
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                int gp[3] = {i, j, k}, sp[3] = {i, j, k};
                gp[axis] = ghost;
                sp[axis] = inner;
                fn(gp, sp);
            }
}

}  // namespace

Field pad_with_boundaries(const StructuredGrid& g, const Field& cells,
                          const FieldBc& bc) {
    if (static_cast<long>(cells.size()) != g.cell_count())
        throw std::invalid_argument("pad_with_boundaries: field size mismatch");
    Field out(padded_size(g), 0.0);

    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i)
                out[padded_index(g, i, j, k)] = cells[g.cell_index(i, j, k)];

    // Zero-gradient faces first, fixed-value faces afterwards over the full
    // extended range: shared ghost edges end up with the Dirichlet value.
    for (int pass = 0; pass < 2; ++pass) {
        const BcKind want = pass == 0 ? BcKind::NeumannZero : BcKind::Dirichlet;
        for (int axis = 0; axis < g.axes; ++axis)
            for (int side = 0; side < 2; ++side) {
                const FaceBc& fb = bc[2 * axis + side];
                if (fb.kind != want) continue;
                for_each_ghost(g, axis, side, [&](const int gp[3], const int sp[3]) {
                    const long gi = padded_index(g, gp[0], gp[1], gp[2]);
                    if (fb.kind == BcKind::Dirichlet) {
                        out[gi] = fb.value;
                    } else {
                        out[gi] = out[padded_index(g, sp[0], sp[1], sp[2])];
                    }
                });
            }
    }
    return out;
}

}  // namespace hybridfv
