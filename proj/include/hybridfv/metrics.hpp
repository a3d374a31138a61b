#pragma once

#include "hybridfv/fields.hpp"
#include "hybridfv/grid.hpp"
#include "hybridfv/hybrid.hpp"

#include <string>
#include <vector>

namespace hybridfv {

/// ||truth - pred||_2 / ||truth||_2; NaN sentinel when ||truth||_2 = 0.
double rel_l2(const Field& truth, const Field& pred);
double mse(const Field& truth, const Field& pred);
double mae(const Field& truth, const Field& pred);
double maxae(const Field& truth, const Field& pred);

struct VariableErrors {
    double rel_l2 = 0, mse = 0, mae = 0, maxae = 0;
};

VariableErrors field_errors(const Field& truth, const Field& pred);

Field velocity_magnitude(const StructuredGrid& g, const FieldState& s);

/// Per-step error records of a hybrid trajectory against its ground truth,
/// for the variables T, |u| and the velocity components.
struct ErrorSeries {
    std::vector<std::string> var_names;
    std::vector<long> steps;
    std::vector<double> times;
    std::vector<std::vector<VariableErrors>> rows;  // [step][variable]

    std::vector<VariableErrors> time_average() const;
};

/// Steps present in both trajectories are compared; both must share the
/// snapshot cadence.
ErrorSeries compare_trajectories(
    const StructuredGrid& g,
    const std::vector<std::pair<long, FieldState>>& truth,
    const std::vector<std::pair<long, FieldState>>& pred);

void write_error_series_csv(const ErrorSeries& series, const std::string& path);

/// One row of the hyperparameter sweep table.
struct SweepRow {
    int tl_epochs = 0;
    double residual_threshold = 0;
    double t_cfd = 0, t_ml = 0, t_up = 0;
    long n_switch = 0, n_cfd = 0, n_ml = 0;
    double cfd_total_s = 0;     ///< N * t_cfd
    double hybrid_total_s = 0;  ///< three-bucket sum
    double psi = 0;
    double avg_steps_per_switch = 0;
    VariableErrors temp, umag;  ///< time-averaged
};

/// Runs the hybrid loop for every (epochs, threshold) combination against a
/// shared pure-solver ground truth with the same seed and cadence.
std::vector<SweepRow> benchmark_sweep(const CaseSetup& base,
                                      const std::vector<int>& epoch_grid,
                                      const std::vector<double>& threshold_grid,
                                      const std::string& pretrained_path = {});

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace hybridfv
