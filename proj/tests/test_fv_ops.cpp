#include <doctest.h>

#include "hybridfv/fv_ops.hpp"
#include "hybridfv/grid.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace hybridfv;

namespace {

std::mt19937_64 rng(12345);

double urand(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void fill_random(Field& f) {
    for (double& x : f) x = urand();
}

// Dense divergence oracle: assembles the cell-by-face incidence explicitly.
Field divergence_oracle(const StructuredGrid& g, const FaceField& phi) {
    Field div(g.cell_count(), 0.0);
    const double inv_vol = 1.0 / g.cell_volume();
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                const long c = g.cell_index(i, j, k);
                double acc = 0.0;
                acc += phi.comp[0][g.face_index(0, i + 1, j, k)];
                acc -= phi.comp[0][g.face_index(0, i, j, k)];
                acc += phi.comp[1][g.face_index(1, i, j + 1, k)];
                acc -= phi.comp[1][g.face_index(1, i, j, k)];
                if (g.axes == 3) {
                    acc += phi.comp[2][g.face_index(2, i, j, k + 1)];
                    acc -= phi.comp[2][g.face_index(2, i, j, k)];
                }
                div[c] = acc * inv_vol;
            }
    return div;
}

}  // namespace

TEST_CASE("divergence of a uniform flux is zero") {
    const StructuredGrid g = make_grid({4, 5}, {2.0, 2.5});
    FaceField phi = make_face_field(g);
    for (double& f : phi.comp[0]) f = 0.7;
    for (double& f : phi.comp[1]) f = -0.3;
    for (double d : divergence(g, phi)) CHECK(d == 0.0);
}

TEST_CASE("divergence of phi sampled from u=(x,0) is one") {
    const StructuredGrid g = make_grid({4, 4}, {4.0, 4.0});  // unit spacing
    FaceField phi = make_face_field(g);
    const double area = g.face_area(0);
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i <= g.dims[0]; ++i)
            phi.comp[0][g.face_index(0, i, j)] = static_cast<double>(i) * area;
    for (double d : divergence(g, phi)) CHECK(d == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("divergence matches the dense oracle on random flux") {
    for (int axes = 2; axes <= 3; ++axes) {
        const StructuredGrid g = axes == 2 ? make_grid({4, 4}, {1.3, 0.8})
                                           : make_grid({4, 3, 5}, {1.3, 0.8, 2.0});
        FaceField phi = make_face_field(g);
        for (int a = 0; a < g.axes; ++a) fill_random(phi.comp[a]);
        const Field got = divergence(g, phi);
        const Field want = divergence_oracle(g, phi);
        for (long c = 0; c < g.cell_count(); ++c)
            CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-14));
    }
}

TEST_CASE("gradient reproduces linear fields in the interior") {
    const StructuredGrid g = make_grid({8, 6}, {2.0, 1.5});
    const double a = 3.2, b = -1.0;
    Field T(g.cell_count());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i)
            T[g.cell_index(i, j)] = a * g.cell_center(i, j)[0] + b;
    FieldBc bc = all_neumann();
    bc[XLo] = {BcKind::Dirichlet, b};  // exact wall values at x=0 and x=Lx
    bc[XHi] = {BcKind::Dirichlet, a * g.length(0) + b};

    const auto grad = gradient(g, T, bc);
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 1; i < g.dims[0] - 1; ++i) {
            CHECK(grad[0][g.cell_index(i, j)] == doctest::Approx(a).epsilon(1e-12));
            CHECK(grad[1][g.cell_index(i, j)] == doctest::Approx(0.0).epsilon(1e-12));
        }
}

TEST_CASE("gradient of a constant field is zero") {
    const StructuredGrid g = make_grid({5, 5}, {1, 1});
    const Field c(g.cell_count(), 7.5);
    const auto grad = gradient(g, c, all_neumann());
    for (int a = 0; a < 2; ++a)
        for (double v : grad[a]) CHECK(v == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("gradient interior accuracy is second order") {
    // smooth 1d profile with exact wall values; interior max error halves
    // twice per refinement
    const double k = 2.0;
    auto interior_error = [&](int n) {
        const StructuredGrid g = make_grid({n, 4}, {1.0, 1.0});
        Field f(g.cell_count());
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i)
                f[g.cell_index(i, j)] = std::sin(k * g.cell_center(i, j)[0]);
        FieldBc bc = all_neumann();
        bc[XLo] = {BcKind::Dirichlet, std::sin(0.0)};
        bc[XHi] = {BcKind::Dirichlet, std::sin(k * 1.0)};
        const auto grad = gradient(g, f, bc);
        double err = 0.0;
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 1; i < g.dims[0] - 1; ++i) {
                const double x = g.cell_center(i, j)[0];
                err = std::max(err, std::abs(grad[0][g.cell_index(i, j)] -
                                             k * std::cos(k * x)));
            }
        return err;
    };
    const double e1 = interior_error(16);
    const double e2 = interior_error(32);
    const double e3 = interior_error(64);
    const double slope12 = std::log2(e1 / e2);
    const double slope23 = std::log2(e2 / e3);
    CHECK(slope12 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(slope23 == doctest::Approx(2.0).epsilon(0.1));

    // quadratic fields are reproduced exactly away from walls
    const StructuredGrid g = make_grid({8, 4}, {8.0, 4.0});
    Field q(g.cell_count());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i) {
            const double x = g.cell_center(i, j)[0];
            q[g.cell_index(i, j)] = x * x;
        }
    const auto grad = gradient(g, q, all_neumann());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 1; i < g.dims[0] - 1; ++i) {
            const double x = g.cell_center(i, j)[0];
            CHECK(grad[0][g.cell_index(i, j)] == doctest::Approx(2 * x).epsilon(1e-13));
        }
}

TEST_CASE("upwind convection of a constant with solenoidal flux is zero") {
    const StructuredGrid g = make_grid({5, 4}, {1, 1});
    FaceField phi = make_face_field(g);
    for (double& f : phi.comp[0]) f = 0.9;  // uniform stream in x
    const Field c(g.cell_count(), 3.5);
    const Field conv = upwind_convect(g, phi, c, all_neumann());
    for (double v : conv) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("upwind convection is the one-sided stencil for positive flux") {
    const StructuredGrid g = make_grid({6, 3}, {6.0, 3.0});  // unit cells
    FaceField phi = make_face_field(g);
    const double q = 1.7;
    for (double& f : phi.comp[0]) f = q;
    Field s(g.cell_count());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i)
            s[g.cell_index(i, j)] = std::cos(1.1 * i);
    const Field conv = upwind_convect(g, phi, s, all_neumann());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 1; i < g.dims[0]; ++i) {
            const double want =
                q * (s[g.cell_index(i, j)] - s[g.cell_index(i - 1, j)]);
            CHECK(conv[g.cell_index(i, j)] == doctest::Approx(want).epsilon(1e-14));
        }
}

TEST_CASE("upwind convection matches a cell-centric enumeration oracle") {
    const StructuredGrid g = make_grid({5, 5}, {1.1, 0.7});
    FaceField phi = make_face_field(g);
    for (int a = 0; a < 2; ++a) fill_random(phi.comp[a]);
    Field s(g.cell_count());
    fill_random(s);
    FieldBc bc = all_neumann();
    bc[XLo] = {BcKind::Dirichlet, 0.3};
    bc[YHi] = {BcKind::Dirichlet, -0.8};

    const Field got = upwind_convect(g, phi, s, bc);

    const double inv_vol = 1.0 / g.cell_volume();
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i) {
            const long c = g.cell_index(i, j);
            double acc = 0.0;
            struct FaceInfo {
                int axis, side;  // side 0: low face of the cell
                long f;
            };
            const FaceInfo faces[4] = {{0, 0, g.face_index(0, i, j)},
                                       {0, 1, g.face_index(0, i + 1, j)},
                                       {1, 0, g.face_index(1, i, j)},
                                       {1, 1, g.face_index(1, i, j + 1)}};
            for (const auto& fi : faces) {
                const double flux = phi.comp[fi.axis][fi.f];
                REQUIRE(flux != 0.0);  // random draws never tie
                const double sign = fi.side == 0 ? -1.0 : 1.0;  // outward
                const bool on_wall =
                    (fi.axis == 0 && ((fi.side == 0 && i == 0) ||
                                      (fi.side == 1 && i == g.dims[0] - 1))) ||
                    (fi.axis == 1 && ((fi.side == 0 && j == 0) ||
                                      (fi.side == 1 && j == g.dims[1] - 1)));
                long nb = -1;
                if (!on_wall) {
                    if (fi.axis == 0)
                        nb = fi.side == 0 ? g.cell_index(i - 1, j)
                                          : g.cell_index(i + 1, j);
                    else
                        nb = fi.side == 0 ? g.cell_index(i, j - 1)
                                          : g.cell_index(i, j + 1);
                }
                double up;
                if (on_wall) {
                    const bool inflow = sign * flux < 0;
                    const FaceBc& fb = bc[2 * fi.axis + (fi.side == 0 ? 0 : 1)];
                    up = inflow && fb.kind == BcKind::Dirichlet ? fb.value : s[c];
                } else {
                    // upwind side of the +axis oriented flux
                    const long low_cell = fi.side == 0 ? nb : c;
                    const long high_cell = fi.side == 0 ? c : nb;
                    up = flux > 0 ? s[low_cell] : s[high_cell];
                }
                acc += sign * flux * up * inv_vol;
            }
            CHECK(got[c] == doctest::Approx(acc).epsilon(1e-14));
        }
}

TEST_CASE("laplacian of linear fields vanishes with exact dirichlet walls") {
    const StructuredGrid g = make_grid({6, 5}, {3.0, 2.5});
    const double a = -2.0, b = 4.0;
    Field f(g.cell_count());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i)
            f[g.cell_index(i, j)] = a * g.cell_center(i, j)[0] + b;
    FieldBc bc = all_neumann();
    bc[XLo] = {BcKind::Dirichlet, b};
    bc[XHi] = {BcKind::Dirichlet, a * g.length(0) + b};
    const Field lap = laplacian_apply(g, f, 1.0, bc);
    for (double v : lap) CHECK(v == doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("laplacian of x^2 on unit spacing is 2 coeff in the interior") {
    const StructuredGrid g = make_grid({7, 3}, {7.0, 3.0});
    Field f(g.cell_count());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i) {
            const double x = g.cell_center(i, j)[0];
            f[g.cell_index(i, j)] = x * x;
        }
    const double coeff = 0.37;
    const Field lap = laplacian_apply(g, f, coeff, all_neumann());
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 1; i < g.dims[0] - 1; ++i)
            CHECK(lap[g.cell_index(i, j)] ==
                  doctest::Approx(2.0 * coeff).epsilon(1e-12));
}

TEST_CASE("pure-neumann laplacian annihilates constants (zero row sums)") {
    const StructuredGrid g = make_grid({4, 4}, {1.0, 2.0});
    const Field ones(g.cell_count(), 1.0);
    const Field lap = laplacian_apply(g, ones, 1.0, all_neumann());
    for (double v : lap) CHECK(v == 0.0);
}

TEST_CASE("face flux basics") {
    const StructuredGrid g = make_grid({4, 4}, {4.0, 4.0});
    std::array<Field, 3> u;
    u[0].assign(g.cell_count(), 0.0);
    u[1].assign(g.cell_count(), 0.0);

    SUBCASE("zero velocity gives zero flux") {
        const FaceField phi = face_flux(g, u, nullptr);
        for (int a = 0; a < 2; ++a)
            for (double f : phi.comp[a]) CHECK(f == 0.0);
    }

    SUBCASE("uniform u=(1,0) with unit cells") {
        for (double& x : u[0]) x = 1.0;
        const FaceField phi = face_flux(g, u, nullptr);
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i <= g.dims[0]; ++i) {
                const double f = phi.comp[0][g.face_index(0, i, j)];
                if (i == 0 || i == g.dims[0])
                    CHECK(f == 0.0);  // no-slip wall
                else
                    CHECK(f == doctest::Approx(1.0).epsilon(1e-14));
            }
        for (double f : phi.comp[1]) CHECK(f == 0.0);
    }

    SUBCASE("closed cavity: boundary fluxes sum to zero, global mass exact") {
        for (double& x : u[0]) x = urand();
        for (double& x : u[1]) x = urand();
        const FaceField phi = face_flux(g, u, nullptr);
        CHECK(boundary_flux_sum(g, phi) == 0.0);
        const Field div = divergence(g, phi);
        double total = 0.0;
        for (double d : div) total += d * g.cell_volume();
        CHECK(std::abs(total) <= 1e-13);
    }
}

TEST_CASE("face flux uses the arithmetic mean density") {
    const StructuredGrid g = make_grid({3, 3}, {3.0, 3.0});
    std::array<Field, 3> u;
    u[0].assign(g.cell_count(), 2.0);
    u[1].assign(g.cell_count(), 0.0);
    Field rho(g.cell_count());
    for (long c = 0; c < g.cell_count(); ++c) rho[c] = 1.0 + 0.1 * c;
    const FaceField phi = face_flux(g, u, &rho);
    const long f = g.face_index(0, 1, 1);  // between cells (0,1) and (1,1)
    const double want =
        2.0 * 0.5 * (rho[g.cell_index(0, 1)] + rho[g.cell_index(1, 1)]) *
        g.face_area(0);
    CHECK(phi.comp[0][f] == doctest::Approx(want).epsilon(1e-14));
}
