#include "hybridfv/fv_ops.hpp"

namespace hybridfv {

namespace {

// Visits every face normal to `axis`. fn(face_id, cell_lo, cell_hi) gets
// cell_lo = -1 on the low wall and cell_hi = -1 on the high wall.
template <typename F>
void for_each_face(const StructuredGrid& g, int axis, F&& fn) {
    int n[3] = {g.dims[0], g.dims[1], g.dims[2]};
    n[axis] += 1;
    int ip[3];
    for (ip[2] = 0; ip[2] < n[2]; ++ip[2])
        for (ip[1] = 0; ip[1] < n[1]; ++ip[1])
            for (ip[0] = 0; ip[0] < n[0]; ++ip[0]) {
                const long f = g.face_index(axis, ip[0], ip[1], ip[2]);
                int lo[3] = {ip[0], ip[1], ip[2]};
                int hi[3] = {ip[0], ip[1], ip[2]};
                lo[axis] -= 1;
                long clo = -1, chi = -1;
                if (lo[axis] >= 0) clo = g.cell_index(lo[0], lo[1], lo[2]);
                if (hi[axis] < g.dims[axis]) chi = g.cell_index(hi[0], hi[1], hi[2]);
                fn(f, clo, chi);
            }
}

}  // namespace

FaceField face_flux(const StructuredGrid& g, const std::array<Field, 3>& u,
                    const Field* rho) {
    FaceField phi = make_face_field(g);
    for (int a = 0; a < g.axes; ++a) {
        const double area = g.face_area(a);
        const Field& ua = u[a];
        for_each_face(g, a, [&](long f, long clo, long chi) {
            if (clo < 0 || chi < 0) {
                phi.comp[a][f] = 0.0;  // no-slip wall
                return;
            }
            double un = 0.5 * (ua[clo] + ua[chi]);
            if (rho) un *= 0.5 * ((*rho)[clo] + (*rho)[chi]);
            phi.comp[a][f] = un * area;
        });
    }
    return phi;
}

Field divergence(const StructuredGrid& g, const FaceField& phi) {
    Field div(g.cell_count(), 0.0);
    const double inv_vol = 1.0 / g.cell_volume();
    for (int a = 0; a < g.axes; ++a) {
        for_each_face(g, a, [&](long f, long clo, long chi) {
            const double flux = phi.comp[a][f];
            if (clo >= 0) div[clo] += flux * inv_vol;
            if (chi >= 0) div[chi] -= flux * inv_vol;
        });
    }
    return div;
}

std::array<Field, 3> gradient(const StructuredGrid& g, const Field& s,
                              const FieldBc& bc) {
    std::array<Field, 3> grad;
    for (int a = 0; a < g.axes; ++a) grad[a].assign(g.cell_count(), 0.0);
    for (int a = 0; a < g.axes; ++a) {
        const double inv_dx = 1.0 / g.spacing[a];
        for_each_face(g, a, [&](long f, long clo, long chi) {
            (void)f;
            double face_val;
            if (clo >= 0 && chi >= 0) {
                face_val = 0.5 * (s[clo] + s[chi]);
            } else {
                const FaceBc& fb = bc[2 * a + (clo >= 0 ? 1 : 0)];
                const long c = clo >= 0 ? clo : chi;
                face_val = fb.kind == BcKind::Dirichlet ? fb.value : s[c];
            }
            if (clo >= 0) grad[a][clo] += face_val * inv_dx;
            if (chi >= 0) grad[a][chi] -= face_val * inv_dx;
        });
    }
    return grad;
}

Field upwind_convect(const StructuredGrid& g, const FaceField& phi,
                     const Field& s, const FieldBc& bc) {
    Field conv(g.cell_count(), 0.0);
    const double inv_vol = 1.0 / g.cell_volume();
    for (int a = 0; a < g.axes; ++a) {
        for_each_face(g, a, [&](long f, long clo, long chi) {
            const double flux = phi.comp[a][f];
            double up;
            if (clo >= 0 && chi >= 0) {
                up = flux >= 0 ? s[clo] : s[chi];
            } else if (clo < 0) {
                // low wall: positive flux enters the domain
                const FaceBc& fb = bc[2 * a];
                up = flux >= 0 ? (fb.kind == BcKind::Dirichlet ? fb.value : s[chi])
                               : s[chi];
            } else {
                const FaceBc& fb = bc[2 * a + 1];
                up = flux >= 0 ? s[clo]
                               : (fb.kind == BcKind::Dirichlet ? fb.value : s[clo]);
            }
            if (clo >= 0) conv[clo] += flux * up * inv_vol;
            if (chi >= 0) conv[chi] -= flux * up * inv_vol;
        });
    }
    return conv;
}

Field laplacian_apply(const StructuredGrid& g, const Field& s, double coeff,
                      const FieldBc& bc) {
    Field lap(g.cell_count(), 0.0);
    const double inv_vol = 1.0 / g.cell_volume();
    for (int a = 0; a < g.axes; ++a) {
        const double area_over_d = g.face_area(a) / g.spacing[a];
        for_each_face(g, a, [&](long f, long clo, long chi) {
            (void)f;
            if (clo >= 0 && chi >= 0) {
                const double flux = area_over_d * (s[chi] - s[clo]);
                lap[clo] += flux * inv_vol;
                lap[chi] -= flux * inv_vol;
            } else {
                const FaceBc& fb = bc[2 * a + (clo >= 0 ? 1 : 0)];
                if (fb.kind != BcKind::Dirichlet) return;  // zero-gradient: no flux
                const long c = clo >= 0 ? clo : chi;
                // ghost value 2*wall - interior at one spacing
                const double ghost = 2.0 * fb.value - s[c];
                lap[c] += area_over_d * (ghost - s[c]) * inv_vol;
            }
        });
    }
    for (double& v : lap) v *= coeff;
    return lap;
}

double boundary_flux_sum(const StructuredGrid& g, const FaceField& phi) {
    double sum = 0.0;
    for (int a = 0; a < g.axes; ++a) {
        for_each_face(g, a, [&](long f, long clo, long chi) {
            if (clo < 0) sum -= phi.comp[a][f];  // inward normal on low wall
            if (chi < 0) sum += phi.comp[a][f];
        });
    }
    return sum;
}

}  // namespace hybridfv
