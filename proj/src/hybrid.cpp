#include "hybridfv/hybrid.hpp"

#include "hybridfv/fv_ops.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hybridfv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kReferenceFloor = 1e-30;

}  // namespace

void HybridConfig::validate() const {
    if (!(residual_threshold > 1))
        throw std::invalid_argument("residual_threshold must exceed 1");
    if (tl_buffer < 2) throw std::invalid_argument("tl_buffer must be >= 2");
    if (burst_len < tl_buffer)
        throw std::invalid_argument("burst_len must be >= tl_buffer");
    if (total_steps < burst_len)
        throw std::invalid_argument("total_steps must be >= burst_len");
    if (tl_epochs < 0) throw std::invalid_argument("tl_epochs must be >= 0");
    if (initial_cfd_steps < tl_buffer)
        throw std::invalid_argument("initial_cfd_steps must be >= tl_buffer");
    if (snapshot_cadence < 1)
        throw std::invalid_argument("snapshot_cadence must be >= 1");
}

double relative_residual(const MassResidual& current, const MassResidual& reference,
                         bool* degenerate) {
    double ref = reference.value;
    if (!(ref > kReferenceFloor)) {
        ref = kReferenceFloor;
        if (degenerate) *degenerate = true;
    }
    return current.value / ref;
}

Field density_from_state(const FieldState& state, const Field& p_abs,
                         GasConstants constants) {
    return ideal_gas_density(p_abs, state.T, constants);
}

FluxCorrectionResult flux_correct(const StructuredGrid& g, FieldState& state,
                                  const PcgSettings& pcg) {
    FluxCorrectionResult res;
    const long n = g.cell_count();
    FaceField phi = face_flux(g, state.u, nullptr);
    Field div = divergence(g, phi);
    double presq = 0;
    for (double d : div) presq += d * d;
    res.div_presq = presq / static_cast<double>(n);

    const StencilOperator op = negative_laplacian(g, all_neumann());
    Field rhs(div.size());
    for (std::size_t c = 0; c < div.size(); ++c) rhs[c] = -div[c];
    PcgResult sol;
    try {
        sol = pcg_solve(op, rhs, pcg);
    } catch (const std::exception&) {
        res.fallback = true;
    }
    if (!res.fallback && !sol.converged) res.fallback = true;
    if (res.fallback) {
        // hand off uncorrected; the caller records the flag
        state.phi = phi;
        res.div_postsq = res.div_presq;
        return res;
    }

    const Field& lambda = sol.x;
    // face-level correction: phi -= grad_f(lambda) * area
    for (int a = 0; a < g.axes; ++a) {
        const double coeff = g.face_area(a) / g.spacing[a];
        const long nx = (a == 0) ? g.dims[0] + 1 : g.dims[0];
        const long ny = (a == 1) ? g.dims[1] + 1 : g.dims[1];
        const long nz = (a == 2) ? g.dims[2] + 1 : g.dims[2];
        for (long k = 0; k < nz; ++k)
            for (long j = 0; j < ny; ++j)
                for (long i = 0; i < nx; ++i) {
                    int ip[3] = {static_cast<int>(i), static_cast<int>(j),
                                 static_cast<int>(k)};
                    if (ip[a] == 0 || ip[a] == g.dims[a]) continue;
                    int lo[3] = {ip[0], ip[1], ip[2]};
                    lo[a] -= 1;
                    const long f = g.face_index(a, ip[0], ip[1], ip[2]);
                    phi.comp[a][f] -= coeff * (lambda[g.cell_index(ip[0], ip[1], ip[2])] -
                                               lambda[g.cell_index(lo[0], lo[1], lo[2])]);
                }
    }
    state.phi = phi;
    const auto grad_l = gradient(g, lambda, all_neumann());
    for (int a = 0; a < g.axes; ++a)
        for (long c = 0; c < n; ++c) state.u[a][c] -= grad_l[a][c];

    Field div_post = divergence(g, state.phi);
    double postsq = 0;
    for (double d : div_post) postsq += d * d;
    res.div_postsq = postsq / static_cast<double>(n);
    return res;
}

namespace {

// The solver refuses states past its CFL precondition; a prediction that
// would break it is as unusable as a non-finite one.
bool cfl_admissible(const StructuredGrid& g, const FieldState& s, double dt) {
    for (int a = 0; a < g.axes; ++a) {
        const double limit = 0.5 * g.spacing[a] / dt;
        for (double v : s.u[a])
            if (!(std::abs(v) <= limit)) return false;
    }
    return true;
}

}  // namespace

RolloutResult ml_rollout(SurrogateModel& model, FieldState& state,
                         const HybridConfig& config, const MassResidual& reference,
                         long step_budget, HybridLedger& ledger,
                         const StepSink& step_sink) {
    RolloutResult res;
    const long base_step = ledger.completed_steps();
    const auto t0 = Clock::now();
    while (res.steps < step_budget) {
        const long step_id = base_step + res.steps + 1;
        FieldState candidate;
        bool usable = true;
        try {
            candidate = model.predict_next_state(state);
        } catch (const std::exception&) {
            usable = false;
        }
        // the admissibility guard protects the solver handoff; a pure
        // rollout (infinite threshold) never hands off within its budget
        if (usable && std::isfinite(config.residual_threshold) &&
            !cfl_admissible(model.grid(), candidate, model.dt()))
            usable = false;
        if (!usable) {
            res.forced_switch = true;
            ledger.forced_switches += 1;
            ledger.residual_trace.push_back(
                {step_id, std::numeric_limits<double>::infinity(), false, true});
            break;
        }
        const MassResidual rm = compute_mass_residual(model.grid(), candidate);
        bool degenerate = false;
        const double r_rel = relative_residual(rm, reference, &degenerate);
        if (degenerate) ledger.degenerate_reference = true;
        if (!std::isfinite(r_rel)) {
            res.forced_switch = true;
            ledger.forced_switches += 1;
            ledger.residual_trace.push_back({step_id, r_rel, false, true});
            break;
        }
        if (r_rel > config.residual_threshold) {
            ledger.residual_trace.push_back({step_id, r_rel, false, false});
            break;
        }
        state = std::move(candidate);
        res.steps += 1;
        ledger.n_ml += 1;
        ledger.residual_trace.push_back({step_id, r_rel, true, false});
        if (step_sink) step_sink(step_id, state);
    }
    ledger.t_ml_total += seconds_since(t0);
    return res;
}

TrainReport transfer_learn_cycle(SurrogateModel& model,
                                 const std::vector<FieldState>& burst_snapshots,
                                 const HybridConfig& config, HybridLedger& ledger) {
    if (static_cast<int>(burst_snapshots.size()) < config.tl_buffer)
        throw std::invalid_argument("transfer_learn_cycle: burst shorter than tl_buffer");
    std::vector<FieldState> buffer(
        burst_snapshots.end() - config.tl_buffer, burst_snapshots.end());
    const auto t0 = Clock::now();
    TrainReport report = model.train(buffer, config.tl_epochs, true);
    ledger.t_up_total += seconds_since(t0);
    return report;
}

double speedup_psi(double t_cfd, double t_ml, double t_up, long n_cfd, long n_ml,
                   long n_switch, long total_steps) {
    const double denom = n_cfd * t_cfd + n_ml * t_ml + n_switch * t_up;
    return total_steps * t_cfd / denom;
}

double speedup_psi(const HybridLedger& ledger, long total_steps) {
    return speedup_psi(ledger.t_cfd_mean(), ledger.t_ml_mean(), ledger.t_up_mean(),
                       ledger.n_cfd, ledger.n_ml, ledger.n_switch, total_steps);
}

namespace {

void emit(const SnapshotSink& sink, int cadence, long step, const FieldState& s) {
    if (sink && (step % cadence == 0)) sink(step, s);
}

}  // namespace

HybridRunResult hybrid_run(const CaseSetup& setup, const std::string& pretrained_path,
                           const SnapshotSink& sink,
                           const CheckpointSink& checkpoint_sink) {
    const HybridConfig& hc = setup.hybrid;
    hc.validate();
    const long N = hc.total_steps;

    HybridRunResult result;
    HybridLedger& ledger = result.ledger;

    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState state = solver.initial_state();
    emit(sink, hc.snapshot_cadence, 0, state);

    const auto run_start = Clock::now();

    // initial solver phase
    const int first_burst = static_cast<int>(
        std::min<long>(hc.initial_cfd_steps, N));
    std::vector<FieldState> burst =
        solver.run_burst(state, first_burst, &ledger.t_cfd_total);
    ledger.n_cfd += first_burst;
    for (int s = 0; s < first_burst; ++s)
        emit(sink, hc.snapshot_cadence, s + 1, burst[s]);

    MassResidual reference = compute_mass_residual(setup.grid, state);

    // initial model: trained from scratch, or adapted from a checkpoint
    const auto train_start = Clock::now();
    std::unique_ptr<SurrogateModel> model;
    {
        std::vector<FieldState> buffer(burst.end() - std::min<std::size_t>(
                                           burst.size(), hc.tl_buffer),
                                       burst.end());
        if (pretrained_path.empty()) {
            model = std::make_unique<SurrogateModel>(
                setup.model_shape, setup.grid, setup.boundaries,
                setup.physics.dt, setup.seed);
            model->fit_normalization(buffer);
            model->train(buffer, hc.initial_epochs, false);
        } else {
            model = std::make_unique<SurrogateModel>(load_checkpoint(
                pretrained_path, setup.grid, setup.boundaries, setup.physics.dt));
            model->train(buffer, hc.tl_epochs, true);
        }
    }
    ledger.t_initial_train = seconds_since(train_start);

    double best_val = std::numeric_limits<double>::infinity();

    while (ledger.completed_steps() < N) {
        if (hc.reference_mode == ReferenceMode::PerRollout)
            reference = compute_mass_residual(setup.grid, state);

        const long before = ledger.completed_steps();
        RolloutResult rr = ml_rollout(
            *model, state, hc, reference, N - before, ledger,
            [&](long step, const FieldState& s) {
                emit(sink, hc.snapshot_cadence, step, s);
            });
        if (ledger.completed_steps() >= N) break;

        // handoff bookkeeping
        ledger.rollout_lengths.push_back(rr.steps);
        ledger.n_switch += 1;

        state.rho = density_from_state(state, solver.absolute_pressure(state.p));
        if (hc.flux_correction) {
            FluxCorrectionResult fc = flux_correct(setup.grid, state, setup.pcg);
            if (fc.fallback) ledger.flux_fallbacks += 1;
            ledger.flux_reduction.push_back(
                fc.div_postsq > 0 ? fc.div_presq / fc.div_postsq
                                  : std::numeric_limits<double>::infinity());
        }

        const int burst_n = static_cast<int>(
            std::min<long>(hc.burst_len, N - ledger.completed_steps()));
        const long cfd_base = ledger.completed_steps();
        burst = solver.run_burst(state, burst_n, &ledger.t_cfd_total);
        ledger.n_cfd += burst_n;
        for (int s = 0; s < burst_n; ++s)
            emit(sink, hc.snapshot_cadence, cfd_base + s + 1, burst[s]);
        if (ledger.completed_steps() >= N) break;

        if (static_cast<int>(burst.size()) >= hc.tl_buffer) {
            TrainReport tr = transfer_learn_cycle(*model, burst, hc, ledger);
            if (tr.best_val_loss < best_val) {
                best_val = tr.best_val_loss;
                if (checkpoint_sink) checkpoint_sink(*model);
            }
        }
    }

    ledger.wall_total = seconds_since(run_start) - ledger.t_initial_train;
    result.final_state = state;
    result.model = std::move(model);
    return result;
}

FieldState cfd_reference_run(const CaseSetup& setup, long total_steps,
                             const SnapshotSink& sink) {
    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState state = solver.initial_state();
    emit(sink, setup.hybrid.snapshot_cadence, 0, state);
    for (long s = 1; s <= total_steps; ++s) {
        solver.step(state);
        emit(sink, setup.hybrid.snapshot_cadence, s, state);
    }
    return state;
}

}  // namespace hybridfv
