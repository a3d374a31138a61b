#include "hybridfv/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hybridfv {

Field ideal_gas_density(const Field& p_abs, const Field& T, GasConstants gc) {
    Field rho(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (!(T[i] > 0)) throw std::runtime_error("ideal_gas_density: T <= 0");
        rho[i] = p_abs[i] * gc.molar_mass / (gc.gas_constant * T[i]);
    }
    return rho;
}

PhysicsParams physics_from_rayleigh(double rayleigh, double prandtl,
                                    double t_hot, double t_cold, double length,
                                    double dt, double gravity, double beta) {
    if (rayleigh <= 0 || prandtl <= 0)
        throw std::invalid_argument("physics: Ra and Pr must be positive");
    if (!(t_hot > t_cold))
        throw std::invalid_argument("physics: need t_hot > t_cold");
    PhysicsParams p;
    p.t_hot = t_hot;
    p.t_cold = t_cold;
    p.t_ref = 0.5 * (t_hot + t_cold);
    p.gravity = gravity;
    p.beta = beta > 0 ? beta : 1.0 / p.t_ref;
    p.dt = dt;
    const double nu_alpha = p.gravity * p.beta * (t_hot - t_cold) *
                            length * length * length / rayleigh;
    p.nu = std::sqrt(prandtl * nu_alpha);
    p.alpha = p.nu / prandtl;
    return p;
}

MassResidual compute_mass_residual(const StructuredGrid& g, const FieldState& s) {
    const FaceField phi = face_flux(g, s.u, nullptr);
    const Field div = divergence(g, phi);
    double acc = 0.0;
    for (double d : div) acc += d * d;
    return MassResidual{acc / static_cast<double>(div.size())};
}

CfdSolver::CfdSolver(const StructuredGrid& grid, const PhysicsParams& params,
                     const BoundarySpec& bcs, PcgSettings pcg)
    : grid_(&grid), params_(params), bcs_(bcs), pcg_(pcg) {
    if (params_.dt <= 0) throw std::invalid_argument("solver: dt must be positive");
    if (params_.nu <= 0 || params_.alpha <= 0)
        throw std::invalid_argument("solver: nu and alpha must be positive");
    // pressure closure is pure Neumann in a closed cavity
    pressure_op_ = negative_laplacian(grid, all_neumann());
    p_guess_.assign(grid.cell_count(), 0.0);
    rho_ref_ = kAtmosphericPressure * GasConstants{}.molar_mass /
               (GasConstants{}.gas_constant * params_.t_ref);
}

FieldState CfdSolver::initial_state() const {
    FieldState s = make_state(*grid_);
    s.T.assign(grid_->cell_count(), params_.t_ref);
    s.rho = ideal_gas_density(absolute_pressure(s.p), s.T);
    return s;
}

Field CfdSolver::absolute_pressure(const Field& p_kinematic) const {
    Field p_abs(p_kinematic.size());
    for (std::size_t i = 0; i < p_abs.size(); ++i)
        p_abs[i] = kAtmosphericPressure + rho_ref_ * p_kinematic[i];
    return p_abs;
}

StepDiagnostics CfdSolver::step(FieldState& state) {
    const StructuredGrid& g = *grid_;
    const long n = g.cell_count();
    const double dt = params_.dt;
    StepDiagnostics diag;

    // CFL guard on the incoming state
    double max_cfl = 0.0;
    for (int a = 0; a < g.axes; ++a)
        for (long c = 0; c < n; ++c)
            max_cfl = std::max(max_cfl, std::abs(state.u[a][c]) * dt / g.spacing[a]);
    diag.max_cfl = max_cfl;
    if (max_cfl > 0.5)
        throw std::runtime_error("cfd_step: CFL " + std::to_string(max_cfl) +
                                 " exceeds 0.5 at t=" + std::to_string(state.time));

    // (i) provisional velocity: explicit convection, diffusion, buoyancy
    std::array<Field, 3> u_star;
    for (int a = 0; a < g.axes; ++a) {
        const FieldBc& bc = bcs_.velocity[a];
        Field conv = upwind_convect(g, state.phi, state.u[a], bc);
        Field lap = laplacian_apply(g, state.u[a], params_.nu, bc);
        u_star[a] = state.u[a];
        for (long c = 0; c < n; ++c)
            u_star[a][c] += dt * (-conv[c] + lap[c]);
    }
    for (long c = 0; c < n; ++c)  // gravity along -y
        u_star[1][c] += dt * params_.gravity * params_.beta *
                        (state.T[c] - params_.t_ref);

    // (ii) pressure Poisson from the provisional flux
    FaceField phi_star = face_flux(g, u_star, nullptr);
    Field div_star = divergence(g, phi_star);
    double presq = 0.0;
    for (double d : div_star) presq += d * d;
    diag.div_presq = presq / static_cast<double>(n);

    // the operator is the negative laplacian, so lap(p) = div(phi*)/dt
    // becomes A p = -div(phi*)/dt
    Field rhs(n);
    for (long c = 0; c < n; ++c) rhs[c] = -div_star[c] / dt;
    PcgResult sol = pcg_solve(pressure_op_, rhs, pcg_, &p_guess_);
    if (!sol.converged)
        throw std::runtime_error("cfd_step: pressure solve stalled at residual " +
                                 std::to_string(sol.rel_residual));
    diag.pcg_iterations = sol.iterations;
    state.p = sol.x;
    p_guess_ = sol.x;

    // (iii) corrected cell velocity and exactly projected face flux
    const auto grad_p = gradient(g, state.p, all_neumann());
    for (int a = 0; a < g.axes; ++a)
        for (long c = 0; c < n; ++c)
            state.u[a][c] = u_star[a][c] - dt * grad_p[a][c];
    state.phi = phi_star;
    for (int a = 0; a < g.axes; ++a) {
        const double coeff = dt * g.face_area(a) / g.spacing[a];
        const long nx = (a == 0) ? g.dims[0] + 1 : g.dims[0];
        const long ny = (a == 1) ? g.dims[1] + 1 : g.dims[1];
        const long nz = (a == 2) ? g.dims[2] + 1 : g.dims[2];
        for (long k = 0; k < nz; ++k)
            for (long j = 0; j < ny; ++j)
                for (long i = 0; i < nx; ++i) {
                    int ip[3] = {static_cast<int>(i), static_cast<int>(j),
                                 static_cast<int>(k)};
                    if (ip[a] == 0 || ip[a] == g.dims[a]) continue;  // wall: flux 0
                    int lo[3] = {ip[0], ip[1], ip[2]};
                    lo[a] -= 1;
                    const long f = g.face_index(a, ip[0], ip[1], ip[2]);
                    const long clo = g.cell_index(lo[0], lo[1], lo[2]);
                    const long chi = g.cell_index(ip[0], ip[1], ip[2]);
                    state.phi.comp[a][f] -= coeff * (state.p[chi] - state.p[clo]);
                }
    }
    {
        Field div_post = divergence(g, state.phi);
        double postsq = 0.0;
        for (double d : div_post) postsq += d * d;
        diag.div_postsq = postsq / static_cast<double>(n);
    }

    // (iv) temperature advance with the projected flux
    {
        Field conv = upwind_convect(g, state.phi, state.T, bcs_.temperature);
        Field lap = laplacian_apply(g, state.T, params_.alpha, bcs_.temperature);
        for (long c = 0; c < n; ++c) state.T[c] += dt * (-conv[c] + lap[c]);
    }

    state.rho = ideal_gas_density(absolute_pressure(state.p), state.T);
    state.time += dt;
    return diag;
}

std::vector<FieldState> CfdSolver::run_burst(FieldState& state, int n_steps,
                                             double* wall_seconds) {
    if (n_steps < 1) throw std::invalid_argument("run_burst: n_steps must be >= 1");
    std::vector<FieldState> snaps;
    snaps.reserve(n_steps);
    const auto t0 = std::chrono::steady_clock::now();
    for (int s = 0; s < n_steps; ++s) {
        step(state);
        snaps.push_back(state);
    }
    if (wall_seconds) {
        const auto t1 = std::chrono::steady_clock::now();
        *wall_seconds += std::chrono::duration<double>(t1 - t0).count();
    }
    return snaps;
}

}  // namespace hybridfv
