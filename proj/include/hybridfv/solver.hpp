#pragma once

#include "hybridfv/fields.hpp"
#include "hybridfv/fv_ops.hpp"
#include "hybridfv/grid.hpp"
#include "hybridfv/pcg.hpp"

#include <functional>
#include <vector>

namespace hybridfv {

struct GasConstants {
    double molar_mass = 0.02896;   ///< W, kg/mol
    double gas_constant = 8.314;   ///< R, J/(mol K)
};

inline constexpr double kAtmosphericPressure = 101325.0;  // Pa

/// rho = p_abs * W / (R * T), per cell. Throws on nonpositive temperature.
Field ideal_gas_density(const Field& p_abs, const Field& T, GasConstants gc = {});

struct PhysicsParams {
    double nu = 0.0;       ///< kinematic viscosity, m^2/s
    double alpha = 0.0;    ///< thermal diffusivity, m^2/s
    double beta = 0.0;     ///< thermal expansion, 1/K
    double gravity = 9.81; ///< magnitude, acts along -y
    double t_ref = 0.0;    ///< Boussinesq linearization point, K
    double t_hot = 0.0;
    double t_cold = 0.0;
    double dt = 0.0;       ///< s

    double rayleigh(double length) const {
        return gravity * beta * (t_hot - t_cold) * length * length * length /
               (nu * alpha);
    }
    double prandtl() const { return nu / alpha; }
};

/// Fills nu/alpha from (Ra, Pr) at the given cavity height, with
/// beta = 1/t_ref unless set explicitly.
PhysicsParams physics_from_rayleigh(double rayleigh, double prandtl,
                                    double t_hot, double t_cold, double length,
                                    double dt, double gravity = 9.81,
                                    double beta = 0.0);

struct MassResidual {
    double value = 0.0;  ///< mean squared cell divergence, 1/s^2
};

/// Divergence of the unit-density interpolated flux of u, mean-squared
/// over cells. This is the switching-criterion residual: it stays at
/// truncation level even for projected states.
MassResidual compute_mass_residual(const StructuredGrid& g, const FieldState& s);

struct StepDiagnostics {
    int pcg_iterations = 0;
    double div_presq = 0.0;   ///< mean squared div(phi) before projection
    double div_postsq = 0.0;  ///< after projection
    double max_cfl = 0.0;
};

/// Transient Boussinesq natural-convection solver: explicit upwind
/// advection and diffusion with a pressure projection that corrects the
/// face fluxes exactly. One session advances one state at a time;
/// independent sessions are safe to run in parallel.
class CfdSolver {
public:
    CfdSolver(const StructuredGrid& grid, const PhysicsParams& params,
              const BoundarySpec& bcs, PcgSettings pcg = {});

    /// Quiescent start: u = 0, T = t_ref, p = 0, rho from the ideal gas law.
    FieldState initial_state() const;

    /// Advances state by dt in place. Throws std::runtime_error on CFL
    /// violation or pressure-solve failure.
    StepDiagnostics step(FieldState& state);

    /// n_steps sequential steps; returns a snapshot after each step.
    /// Accumulates wall seconds into *wall_seconds when provided.
    std::vector<FieldState> run_burst(FieldState& state, int n_steps,
                                      double* wall_seconds = nullptr);

    const StructuredGrid& grid() const { return *grid_; }
    const PhysicsParams& params() const { return params_; }
    const BoundarySpec& boundaries() const { return bcs_; }
    double reference_density() const { return rho_ref_; }

    /// Absolute pressure from the kinematic gauge field.
    Field absolute_pressure(const Field& p_kinematic) const;

private:
    const StructuredGrid* grid_;
    PhysicsParams params_;
    BoundarySpec bcs_;
    PcgSettings pcg_;
    StencilOperator pressure_op_;
    Field p_guess_;
    double rho_ref_;
};

}  // namespace hybridfv
