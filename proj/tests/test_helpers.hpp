#pragma once

#include "hybridfv/hybrid.hpp"
#include "hybridfv/solver.hpp"

namespace hybridfv::testhelpers {

/// Scaled-down baseline cavity: Ra 1e6, Pr 0.705, the baseline wall
/// temperatures, dt chosen for a comfortable stability margin.
inline CaseSetup desk_case(int n, double dt = 0.01, double rayleigh = 1e6,
                           double t_hot = 307.75, double t_cold = 288.15) {
    CaseSetup setup;
    setup.grid = make_grid({n, n}, {1.0, 1.0});
    setup.physics =
        physics_from_rayleigh(rayleigh, 0.705, t_hot, t_cold, 1.0, dt);
    setup.boundaries = cavity_boundaries(t_hot, t_cold, 2);
    setup.pcg = PcgSettings{1e-8, 2000, Preconditioner::IncompleteCholesky};
    setup.hybrid.total_steps = 100;
    setup.hybrid.residual_threshold = 5.0;
    setup.hybrid.reference_mode = ReferenceMode::PerRollout;
    setup.hybrid.initial_epochs = 60;
    setup.model_shape.kind = ModelKind::Dense;
    setup.model_shape.axes = 2;
    setup.model_shape.hidden_width = 16;
    setup.seed = 7;
    return setup;
}

inline CaseSetup desk_case_3d(int n, double dt = 0.02, double rayleigh = 1e5) {
    CaseSetup setup;
    setup.grid = make_grid({n, n, n}, {1.0, 1.0, 1.0});
    setup.physics = physics_from_rayleigh(rayleigh, 0.705, 307.75, 288.15, 1.0, dt);
    setup.boundaries = cavity_boundaries(307.75, 288.15, 3);
    setup.pcg = PcgSettings{1e-8, 3000, Preconditioner::IncompleteCholesky};
    setup.hybrid.total_steps = 60;
    setup.hybrid.residual_threshold = 5.0;
    setup.hybrid.reference_mode = ReferenceMode::PerRollout;
    setup.hybrid.initial_epochs = 40;
    setup.model_shape.kind = ModelKind::Dense;
    setup.model_shape.axes = 3;
    setup.model_shape.hidden_width = 16;
    setup.seed = 7;
    return setup;
}

}  // namespace hybridfv::testhelpers
