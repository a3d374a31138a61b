#pragma once

#include "hybridfv/fields.hpp"
#include "hybridfv/grid.hpp"
#include "hybridfv/nn.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hybridfv {

/// Per-variable min/max fitted on the initial training snapshots; states
/// map to [0,1] and derivative targets are scaled by the same range.
struct NormStats {
    struct Range {
        double min = 0.0, max = 1.0;
        double scale() const {
            const double r = max - min;
            return r > 0 ? r : 1.0;
        }
    };
    std::vector<Range> per_var;  // order: u_x, u_y, (u_z,) T

    double normalize(int var, double x) const {
        return (x - per_var[var].min) / per_var[var].scale();
    }
    double denormalize_delta(int var, double d) const {
        return d * per_var[var].scale();
    }
};

/// Variables transported by the surrogate, in feature order.
std::vector<Var> surrogate_variables(int axes);

/// Stencil offsets per variable: center, -x, +x, -y, +y (, -z, +z).
int stencil_size(int axes);

NormStats fit_norm_stats(const StructuredGrid& g,
                         const std::vector<FieldState>& snapshots);

/// One row per cell; V*S columns of padded, normalized neighbor values.
Matrix build_stencil_features(const StructuredGrid& g, const FieldState& state,
                              const BoundarySpec& bcs, const NormStats& stats);

enum class ModelKind { Dense, Spectral };

struct ModelShape {
    ModelKind kind = ModelKind::Dense;
    int axes = 2;
    std::size_t hidden_width = 398;  ///< dense width, or spectral channel width
    int modes = 12;                  ///< spectral only
    int fourier_layers = 3;          ///< spectral only
    double dropout = 0.2;

    std::size_t n_vars() const { return axes == 3 ? 4 : 3; }
    std::size_t feature_len() const { return n_vars() * stencil_size(axes); }
};

struct TrainReport {
    int epochs_run = 0;
    int pairs_used = 0;
    int best_epoch = 0;          ///< 0 means the pre-training weights won
    double initial_val_loss = 0.0;
    double best_val_loss = 0.0;
    double final_train_loss = 0.0;
};

/// Per-variable subnetworks plus the shared normalization and optimizer
/// state. Owns its RNG streams, so runs are reproducible from the seed.
class SurrogateModel {
public:
    SurrogateModel(const ModelShape& shape, const StructuredGrid& grid,
                   const BoundarySpec& bcs, double dt, std::uint64_t seed);

    /// One surrogate step: predicted per-variable increments are added to
    /// the current fields; pressure is carried unchanged. Throws
    /// std::runtime_error if any output is non-finite.
    FieldState predict_next_state(const FieldState& state);

    /// Combined MSE loss over all variables and its parameter gradients.
    double loss_and_grads(const Matrix& features,
                          const std::vector<Field>& targets, bool train_mode = true);

    /// Full-batch training on consecutive snapshots. Pairs (k, k+1) become
    /// (features, normalized increments); the last pair doubles as the
    /// validation set and the best checkpoint is restored on return.
    TrainReport train(const std::vector<FieldState>& snapshots, int epochs,
                      bool freeze_first);

    /// Fits normalization from snapshots; called once before first training.
    void fit_normalization(const std::vector<FieldState>& snapshots);

    Matrix features_of(const FieldState& state) const;
    Matrix infer(int var, const Matrix& features);  ///< inference mode forward

    const StructuredGrid& grid() const { return grid_; }
    const ModelShape& shape() const { return shape_; }
    const NormStats& stats() const { return stats_; }
    NormStats& stats() { return stats_; }
    bool normalized() const { return !stats_.per_var.empty(); }
    double dt() const { return dt_; }
    AdamState& optimizer() { return opt_; }
    std::vector<TensorRef> tensors();

    /// Re-binds the grid/boundaries/dt after a checkpoint load.
    void bind_case(const StructuredGrid& grid, const BoundarySpec& bcs, double dt);

    friend void save_checkpoint(const SurrogateModel&, const std::string&);
    friend SurrogateModel load_checkpoint(const std::string&,
                                          const StructuredGrid&,
                                          const BoundarySpec&, double);

private:
    ModelShape shape_;
    StructuredGrid grid_;
    BoundarySpec bcs_;
    double dt_;
    NormStats stats_;
    Rng init_rng_, dropout_rng_;
    std::vector<std::unique_ptr<SubNetwork>> nets_;
    AdamState opt_;

    std::vector<std::unique_ptr<SubNetwork>> clone_nets() const;
    void restore_nets(const std::vector<std::unique_ptr<SubNetwork>>& saved);
};

/// Versioned binary checkpoint: magic "XRNN", shapes and normalization in
/// the header, then every tensor as little-endian 64-bit floats in
/// declaration order.
void save_checkpoint(const SurrogateModel& model, const std::string& path);
SurrogateModel load_checkpoint(const std::string& path, const StructuredGrid& grid,
                               const BoundarySpec& bcs, double dt);

}  // namespace hybridfv
