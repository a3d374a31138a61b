#pragma once

#include "hybridfv/fields.hpp"
#include "hybridfv/grid.hpp"
#include "hybridfv/pcg.hpp"
#include "hybridfv/solver.hpp"
#include "hybridfv/surrogate.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hybridfv {

enum class ReferenceMode { FixedAtFirstHandoff, PerRollout };

struct HybridConfig {
    double residual_threshold = 5.0;  ///< switch when R_rel exceeds this
    int tl_epochs = 2;
    int burst_len = 10;
    int tl_buffer = 3;
    long total_steps = 0;
    ReferenceMode reference_mode = ReferenceMode::FixedAtFirstHandoff;
    int initial_cfd_steps = 10;
    int initial_epochs = 300;   ///< from-scratch training after the first burst
    bool flux_correction = true;
    int snapshot_cadence = 10;

    void validate() const;  ///< throws std::invalid_argument naming the field
};

struct ResidualRecord {
    long step = 0;      ///< global step index of the predicted state
    double r_rel = 0;
    bool accepted = false;
    bool forced = false;  ///< non-finite prediction
};

/// Counters and wall-clock buckets of one hybrid run. Wall times are
/// measurements: identical reruns reproduce every count and trace bitwise
/// but not the timings.
struct HybridLedger {
    long n_cfd = 0, n_ml = 0, n_switch = 0;
    double t_cfd_total = 0, t_ml_total = 0, t_up_total = 0;  // seconds
    double t_initial_train = 0;  ///< from-scratch (or first TL) training, not a bucket
    double wall_total = 0;       ///< run wall time excluding initial training
    std::vector<long> rollout_lengths;        ///< one entry per switch
    std::vector<ResidualRecord> residual_trace;
    long forced_switches = 0;
    long flux_fallbacks = 0;
    std::vector<double> flux_reduction;  ///< div mean-square ratio per handoff
    bool degenerate_reference = false;

    double t_cfd_mean() const { return n_cfd > 0 ? t_cfd_total / n_cfd : 0.0; }
    double t_ml_mean() const { return n_ml > 0 ? t_ml_total / n_ml : 0.0; }
    double t_up_mean() const { return n_switch > 0 ? t_up_total / n_switch : 0.0; }
    long completed_steps() const { return n_cfd + n_ml; }
};

/// R_rel = current / reference. References at or below the floor are
/// substituted by it and flagged as degenerate.
double relative_residual(const MassResidual& current, const MassResidual& reference,
                         bool* degenerate = nullptr);

/// rho = p_abs * W / (R * T) with the absolute pressure retained from the
/// last solver time. Throws on nonpositive temperature.
Field density_from_state(const FieldState& state, const Field& p_abs,
                         GasConstants constants = {});

struct FluxCorrectionResult {
    double div_presq = 0;   ///< mean squared divergence of face_flux(u)
    double div_postsq = 0;  ///< after projection
    bool fallback = false;  ///< solver failed; state handed off uncorrected
};

/// Projects the predicted velocity onto a divergence-free flux: rebuilds
/// phi from u, solves a pure-Neumann Poisson problem and corrects both the
/// face fluxes (exactly) and the cell velocities.
FluxCorrectionResult flux_correct(const StructuredGrid& g, FieldState& state,
                                  const PcgSettings& pcg = {});

struct RolloutResult {
    long steps = 0;
    bool forced_switch = false;  ///< ended on a non-finite prediction
};

using StepSink = std::function<void(long step, const FieldState&)>;

/// Auto-regressive prediction loop guarded by the relative residual: a
/// candidate step is accepted only while R_rel <= threshold; the breaching
/// candidate is discarded and control returns to the solver. Non-finite or
/// CFL-inadmissible candidates force a flagged switch. step_sink is invoked
/// on every accepted step.
RolloutResult ml_rollout(SurrogateModel& model, FieldState& state,
                         const HybridConfig& config, const MassResidual& reference,
                         long step_budget, HybridLedger& ledger,
                         const StepSink& step_sink = nullptr);

/// Fine-tunes on the last tl_buffer burst snapshots with the first layer
/// frozen; wall time lands in the update bucket.
TrainReport transfer_learn_cycle(SurrogateModel& model,
                                 const std::vector<FieldState>& burst_snapshots,
                                 const HybridConfig& config, HybridLedger& ledger);

/// psi = N * t_cfd / (n_cfd * t_cfd + n_ml * t_ml + n_switch * t_up).
double speedup_psi(const HybridLedger& ledger, long total_steps);
double speedup_psi(double t_cfd, double t_ml, double t_up, long n_cfd, long n_ml,
                   long n_switch, long total_steps);

/// Everything needed to run one case.
struct CaseSetup {
    StructuredGrid grid;
    PhysicsParams physics;
    BoundarySpec boundaries;
    HybridConfig hybrid;
    ModelShape model_shape;
    PcgSettings pcg;
    std::uint64_t seed = 1;
};

using SnapshotSink = std::function<void(long step, const FieldState&)>;
/// Called after TL cycles that improve the run-best validation loss.
using CheckpointSink = std::function<void(const SurrogateModel&)>;

struct HybridRunResult {
    HybridLedger ledger;
    std::unique_ptr<SurrogateModel> model;
    FieldState final_state;
};

/// The main hybrid loop: initial solver burst, initial training (or
/// transfer learning from a pretrained checkpoint), then alternating
/// residual-guarded rollouts, density reconstruction, flux projection,
/// correction bursts and online transfer learning until total_steps.
HybridRunResult hybrid_run(const CaseSetup& setup,
                           const std::string& pretrained_path = {},
                           const SnapshotSink& sink = nullptr,
                           const CheckpointSink& checkpoint_sink = nullptr);

/// Pure solver trajectory with the same snapshot cadence (the ground truth
/// for error metrics).
FieldState cfd_reference_run(const CaseSetup& setup, long total_steps,
                             const SnapshotSink& sink = nullptr);

}  // namespace hybridfv
