#include <doctest.h>

#include "hybridfv/fv_ops.hpp"
#include "hybridfv/solver.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace hybridfv;
using namespace hybridfv::testhelpers;

TEST_CASE("ideal gas density example") {
    const Field p_abs(4, 101325.0);
    const Field T(4, 300.0);
    const Field rho = ideal_gas_density(p_abs, T);
    // 101325 * 0.02896 / (8.314 * 300)
    for (double r : rho) CHECK(r == doctest::Approx(1.17646).epsilon(2e-5));
    CHECK_THROWS(ideal_gas_density(p_abs, Field(4, -1.0)));
}

TEST_CASE("physics from rayleigh number") {
    const PhysicsParams p =
        physics_from_rayleigh(1e6, 0.705, 307.75, 288.15, 1.0, 0.01);
    CHECK(p.t_ref == doctest::Approx(297.95));
    CHECK(p.beta == doctest::Approx(1.0 / 297.95));
    CHECK(p.rayleigh(1.0) == doctest::Approx(1e6).epsilon(1e-10));
    CHECK(p.prandtl() == doctest::Approx(0.705).epsilon(1e-12));
}

TEST_CASE("quiescent isothermal state is a fixed point") {
    CaseSetup setup = desk_case(16);
    const double tref = setup.physics.t_ref;
    // both walls held at the reference temperature
    setup.boundaries.temperature[XLo] = {BcKind::Dirichlet, tref};
    setup.boundaries.temperature[XHi] = {BcKind::Dirichlet, tref};
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    solver.step(s);
    for (int a = 0; a < 2; ++a)
        for (double v : s.u[a]) CHECK(v == 0.0);
    for (double t : s.T) CHECK(t == tref);
}

TEST_CASE("buoyancy lifts fluid at the hot wall") {
    CaseSetup setup = desk_case(16);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    // conduction-like initial profile so the forcing is active immediately
    const auto& g = setup.grid;
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i) {
            const double x = g.cell_center(i, j)[0];
            s.T[g.cell_index(i, j)] =
                setup.physics.t_hot +
                (setup.physics.t_cold - setup.physics.t_hot) * x;
        }
    solver.step(s);
    for (int j = 1; j < g.dims[1] - 1; ++j)
        CHECK(s.u[1][g.cell_index(0, j)] > 0.0);
    for (int j = 1; j < g.dims[1] - 1; ++j)
        CHECK(s.u[1][g.cell_index(g.dims[0] - 1, j)] < 0.0);
}

TEST_CASE("mass residual basics") {
    const StructuredGrid g = make_grid({4, 4}, {4.0, 4.0});
    FieldState s = make_state(g);
    CHECK(compute_mass_residual(g, s).value == 0.0);

    // u = (x, 0): interpolated flux gives unit divergence in x-interior
    // cells; wall closures modify the boundary columns
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i)
            s.u[0][g.cell_index(i, j)] = g.cell_center(i, j)[0];
    const Field div = divergence(g, face_flux(g, s.u, nullptr));
    double expect = 0.0;
    for (double d : div) expect += d * d;
    expect /= static_cast<double>(g.cell_count());
    CHECK(compute_mass_residual(g, s).value == doctest::Approx(expect).epsilon(1e-14));
    for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 1; i < g.dims[0] - 1; ++i)
            CHECK(div[g.cell_index(i, j)] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("projection drives the face-flux divergence to machine level") {
    CaseSetup setup = desk_case(32);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    for (int k = 0; k < 20; ++k) {
        const StepDiagnostics d = solver.step(s);
        if (d.div_presq > 1e-30)
            CHECK(d.div_postsq <= 1e-12 * d.div_presq + 1e-16);
    }
}

TEST_CASE("burst returns consecutive snapshots and matches single stepping") {
    CaseSetup setup = desk_case(16);
    CfdSolver a(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    CfdSolver b(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState sa = a.initial_state();
    FieldState sb = b.initial_state();

    const auto burst = a.run_burst(sa, 10);
    REQUIRE(burst.size() == 10);
    for (int k = 0; k < 10; ++k) b.step(sb);
    CHECK(burst.back().time == sb.time);
    CHECK(burst.back().T == sb.T);  // bitwise
    CHECK(burst.back().u[0] == sb.u[0]);
    CHECK(burst.back().phi.comp[0] == sb.phi.comp[0]);

    // the transfer-learning buffer: last three snapshots, consecutive times
    const std::vector<FieldState> tail(burst.end() - 3, burst.end());
    CHECK(tail.size() == 3);
    CHECK(tail[1].time - tail[0].time ==
          doctest::Approx(setup.physics.dt).epsilon(1e-12));
    CHECK(tail[2].time - tail[1].time ==
          doctest::Approx(setup.physics.dt).epsilon(1e-12));

    CfdSolver c(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState sc = c.initial_state();
    const auto one = c.run_burst(sc, 1);
    CHECK(one.size() == 1);
    CHECK(one[0].time == doctest::Approx(setup.physics.dt));
}

TEST_CASE("identical runs are bitwise identical") {
    CaseSetup setup = desk_case(24);
    auto run = [&]() {
        CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
        FieldState s = solver.initial_state();
        solver.run_burst(s, 10);
        return s;
    };
    const FieldState s1 = run();
    const FieldState s2 = run();
    CHECK(s1.T == s2.T);
    CHECK(s1.u[0] == s2.u[0]);
    CHECK(s1.u[1] == s2.u[1]);
    CHECK(s1.p == s2.p);
    CHECK(s1.rho == s2.rho);
    CHECK(s1.phi.comp[0] == s2.phi.comp[0]);
    CHECK(s1.phi.comp[1] == s2.phi.comp[1]);
}

TEST_CASE("temperature honors the wall extremum principle") {
    CaseSetup setup = desk_case(32);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    for (int k = 0; k < 300; ++k) {
        solver.step(s);
        double tmin = s.T[0], tmax = s.T[0];
        for (double t : s.T) {
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        CHECK(tmin >= setup.physics.t_cold - 1e-9);
        CHECK(tmax <= setup.physics.t_hot + 1e-9);
    }
    CHECK(boundary_flux_sum(setup.grid, s.phi) == 0.0);
    double ke = 0.0;
    for (int a = 0; a < 2; ++a)
        for (double v : s.u[a]) ke += v * v;
    CHECK(std::isfinite(ke));
}

TEST_CASE("cfl violation aborts with a diagnostic") {
    CaseSetup setup = desk_case(16);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    for (double& v : s.u[0]) v = 100.0;
    CHECK_THROWS_WITH_AS(solver.step(s), doctest::Contains("CFL"),
                         std::runtime_error);
}

TEST_CASE("a 3d session develops bounded buoyant flow") {
    CaseSetup setup = desk_case_3d(8);
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState s = solver.initial_state();
    for (int k = 0; k < 30; ++k) solver.step(s);
    double max_uy = 0.0;
    for (double v : s.u[1]) max_uy = std::max(max_uy, v);
    CHECK(max_uy > 0.0);
    for (double t : s.T) {
        CHECK(t >= setup.physics.t_cold - 1e-9);
        CHECK(t <= setup.physics.t_hot + 1e-9);
    }
}
