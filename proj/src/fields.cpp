#include "hybridfv/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridfv {

FaceField make_face_field(const StructuredGrid& g) {
    FaceField f;
    for (int a = 0; a < g.axes; ++a) f.comp[a].assign(g.face_count(a), 0.0);
    return f;
}

FieldState make_state(const StructuredGrid& g) {
    FieldState s;
    const long n = g.cell_count();
    for (int a = 0; a < g.axes; ++a) s.u[a].assign(n, 0.0);
    s.T.assign(n, 0.0);
    s.p.assign(n, 0.0);
    s.rho.assign(n, 1.0);
    s.phi = make_face_field(g);
    return s;
}

bool state_shape_ok(const StructuredGrid& g, const FieldState& s) {
    const auto n = static_cast<std::size_t>(g.cell_count());
    for (int a = 0; a < g.axes; ++a) {
        if (s.u[a].size() != n) return false;
        if (s.phi.comp[a].size() != static_cast<std::size_t>(g.face_count(a)))
            return false;
    }
    return s.T.size() == n && s.p.size() == n && s.rho.size() == n;
}

bool state_finite(const StructuredGrid& g, const FieldState& s) {
    auto ok = [](const Field& f) {
        for (double v : f)
            if (!std::isfinite(v)) return false;
        return true;
    };
    for (int a = 0; a < g.axes; ++a)
        if (!ok(s.u[a]) || !ok(s.phi.comp[a])) return false;
    return ok(s.T) && ok(s.p) && ok(s.rho);
}

std::vector<ProbeReading> probe_sample(const StructuredGrid& g,
                                       const FieldState& s,
                                       const std::vector<std::array<double, 3>>& points) {
    std::vector<ProbeReading> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (!g.contains(p)) throw std::out_of_range("probe point outside domain");
        int idx[3] = {0, 0, 0};
        for (int a = 0; a < g.axes; ++a) {
            const int i = static_cast<int>(std::floor((p[a] - g.origin[a]) / g.spacing[a]));
            idx[a] = std::clamp(i, 0, g.dims[a] - 1);
        }
        const long c = g.cell_index(idx[0], idx[1], idx[2]);
        ProbeReading r;
        for (int a = 0; a < g.axes; ++a) r.u[a] = s.u[a][c];
        r.T = s.T[c];
        out.push_back(r);
    }
    return out;
}

std::vector<std::array<double, 3>> default_probe_points(const StructuredGrid& g) {
    const double xc = g.origin[0] + 0.5 * g.length(0);
    const double zc = g.axes == 3 ? g.origin[2] + 0.5 * g.length(2) : 0.0;
    const double ly = g.length(1);
    std::vector<std::array<double, 3>> pts;
    for (double f : {0.05, 0.10, 0.15, 0.85, 0.90, 0.95})
        pts.push_back({xc, g.origin[1] + f * ly, zc});
    return pts;
}

}  // namespace hybridfv
