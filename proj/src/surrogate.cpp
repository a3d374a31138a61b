#include "hybridfv/surrogate.hpp"

#include "hybridfv/fv_ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hybridfv {

std::vector<Var> surrogate_variables(int axes) {
    if (axes == 3) return {Var::Ux, Var::Uy, Var::Uz, Var::Temp};
    return {Var::Ux, Var::Uy, Var::Temp};
}

int stencil_size(int axes) { return axes == 3 ? 7 : 5; }

namespace {

const Field& field_of(const FieldState& s, Var v) {
    switch (v) {
        case Var::Ux: return s.u[0];
        case Var::Uy: return s.u[1];
        case Var::Uz: return s.u[2];
        default: return s.T;
    }
}

Field& field_of(FieldState& s, Var v) {
    switch (v) {
        case Var::Ux: return s.u[0];
        case Var::Uy: return s.u[1];
        case Var::Uz: return s.u[2];
        default: return s.T;
    }
}

}  // namespace

NormStats fit_norm_stats(const StructuredGrid& g,
                         const std::vector<FieldState>& snapshots) {
    if (snapshots.empty())
        throw std::invalid_argument("fit_norm_stats: no snapshots");
    const auto vars = surrogate_variables(g.axes);
    NormStats stats;
    stats.per_var.resize(vars.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const FieldState& s : snapshots)
            for (double x : field_of(s, vars[v])) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        stats.per_var[v] = {lo, hi};
    }
    return stats;
}

Matrix build_stencil_features(const StructuredGrid& g, const FieldState& state,
                              const BoundarySpec& bcs, const NormStats& stats) {
    const auto vars = surrogate_variables(g.axes);
    const int S = stencil_size(g.axes);
    const long n = g.cell_count();
    Matrix feats(n, vars.size() * S);

    for (std::size_t v = 0; v < vars.size(); ++v) {
        Field padded = pad_with_boundaries(g, field_of(state, vars[v]),
                                           bcs.for_var(vars[v]));
        const double vmin = stats.per_var[v].min;
        const double inv_scale = 1.0 / stats.per_var[v].scale();
        for (double& x : padded) x = (x - vmin) * inv_scale;

        const std::size_t base = v * S;
        for (int k = 0; k < g.dims[2]; ++k)
            for (int j = 0; j < g.dims[1]; ++j)
                for (int i = 0; i < g.dims[0]; ++i) {
                    double* row = feats.row(g.cell_index(i, j, k)) + base;
                    row[0] = padded[padded_index(g, i, j, k)];
                    row[1] = padded[padded_index(g, i - 1, j, k)];
                    row[2] = padded[padded_index(g, i + 1, j, k)];
                    row[3] = padded[padded_index(g, i, j - 1, k)];
                    row[4] = padded[padded_index(g, i, j + 1, k)];
                    if (g.axes == 3) {
                        row[5] = padded[padded_index(g, i, j, k - 1)];
                        row[6] = padded[padded_index(g, i, j, k + 1)];
                    }
                }
    }
    return feats;
}

// ---------------------------------------------------------------------------

SurrogateModel::SurrogateModel(const ModelShape& shape, const StructuredGrid& grid,
                               const BoundarySpec& bcs, double dt,
                               std::uint64_t seed)
    : shape_(shape), grid_(grid), bcs_(bcs), dt_(dt),
      init_rng_(seed), dropout_rng_(seed ^ 0x9e3779b97f4a7c15ull) {
    const std::size_t flen = shape_.feature_len();
    for (std::size_t v = 0; v < shape_.n_vars(); ++v) {
        if (shape_.kind == ModelKind::Dense) {
            DenseShape ds{flen, shape_.hidden_width, shape_.dropout};
            nets_.push_back(std::make_unique<DenseNet>(ds, init_rng_, &dropout_rng_));
        } else {
            SpectralShape ss{flen, shape_.hidden_width, shape_.modes,
                             shape_.fourier_layers, shape_.dropout};
            nets_.push_back(std::make_unique<SpectralNet>(ss, init_rng_, &dropout_rng_));
        }
    }
}

void SurrogateModel::bind_case(const StructuredGrid& grid, const BoundarySpec& bcs,
                               double dt) {
    grid_ = grid;
    bcs_ = bcs;
    dt_ = dt;
}

void SurrogateModel::fit_normalization(const std::vector<FieldState>& snapshots) {
    stats_ = fit_norm_stats(grid_, snapshots);
}

Matrix SurrogateModel::features_of(const FieldState& state) const {
    if (stats_.per_var.empty())
        throw std::runtime_error("surrogate: normalization not fitted");
    return build_stencil_features(grid_, state, bcs_, stats_);
}

Matrix SurrogateModel::infer(int var, const Matrix& features) {
    return nets_[var]->forward(features, false);
}

FieldState SurrogateModel::predict_next_state(const FieldState& state) {
    const auto vars = surrogate_variables(grid_.axes);
    const Matrix feats = features_of(state);
    FieldState next = state;
    for (std::size_t v = 0; v < vars.size(); ++v) {
        const Matrix pred = nets_[v]->forward(feats, false);
        Field& target = field_of(next, vars[v]);
        for (std::size_t c = 0; c < target.size(); ++c) {
            const double d = stats_.denormalize_delta(static_cast<int>(v),
                                                      pred.at(c, 0));
            if (!std::isfinite(d))
                throw std::runtime_error("surrogate: non-finite prediction");
            target[c] += d;
        }
    }
    next.phi = face_flux(grid_, next.u, nullptr);
    next.time = state.time + dt_;
    return next;
}

double SurrogateModel::loss_and_grads(const Matrix& features,
                                      const std::vector<Field>& targets,
                                      bool train_mode) {
    double loss = 0.0;
    const double inv_rows = 1.0 / static_cast<double>(features.rows);
    for (std::size_t v = 0; v < nets_.size(); ++v) {
        Matrix pred = nets_[v]->forward(features, train_mode);
        Matrix gy(pred.rows, 1);
        double l = 0.0;
        for (std::size_t i = 0; i < pred.rows; ++i) {
            const double diff = pred.at(i, 0) - targets[v][i];
            l += diff * diff;
            gy.at(i, 0) = 2.0 * diff * inv_rows;
        }
        loss += l * inv_rows;
        nets_[v]->backward(gy);
    }
    return loss;
}

std::vector<TensorRef> SurrogateModel::tensors() {
    static const char* kVarNames[4] = {"ux", "uy", "uz", "temp"};
    const auto vars = surrogate_variables(shape_.axes);
    std::vector<TensorRef> out;
    for (std::size_t v = 0; v < nets_.size(); ++v) {
        const int vi = static_cast<int>(vars[v]);
        const char* name = vars[v] == Var::Temp ? kVarNames[3] : kVarNames[vi];
        nets_[v]->visit_tensors(name, [&](const TensorRef& r) { out.push_back(r); });
    }
    return out;
}

std::vector<std::unique_ptr<SubNetwork>> SurrogateModel::clone_nets() const {
    std::vector<std::unique_ptr<SubNetwork>> out;
    out.reserve(nets_.size());
    for (const auto& n : nets_) out.push_back(n->clone());
    return out;
}

void SurrogateModel::restore_nets(
    const std::vector<std::unique_ptr<SubNetwork>>& saved) {
    nets_.clear();
    for (const auto& n : saved) nets_.push_back(n->clone());
}

namespace {

struct TrainBatch {
    Matrix features;
    std::vector<Field> targets;  // per variable, normalized increments
};

TrainBatch make_batch(const SurrogateModel& model, const StructuredGrid& g,
                      const BoundarySpec& bcs, const NormStats& stats,
                      const std::vector<const FieldState*>& from,
                      const std::vector<const FieldState*>& to) {
    const auto vars = surrogate_variables(g.axes);
    const long n = g.cell_count();
    const std::size_t rows = from.size() * n;
    TrainBatch batch;
    batch.targets.assign(vars.size(), Field(rows, 0.0));
    Matrix feats;
    for (std::size_t p = 0; p < from.size(); ++p) {
        Matrix f = build_stencil_features(g, *from[p], bcs, stats);
        if (p == 0) {
            feats = Matrix(rows, f.cols);
        }
        std::copy(f.data.begin(), f.data.end(),
                  feats.data.begin() + p * f.data.size());
        for (std::size_t v = 0; v < vars.size(); ++v) {
            const Field& a = field_of(*from[p], vars[v]);
            const Field& b = field_of(*to[p], vars[v]);
            const double inv_scale = 1.0 / stats.per_var[v].scale();
            for (long c = 0; c < n; ++c)
                batch.targets[v][p * n + c] = (b[c] - a[c]) * inv_scale;
        }
    }
    batch.features = std::move(feats);
    (void)model;
    return batch;
}

}  // namespace

TrainReport SurrogateModel::train(const std::vector<FieldState>& snapshots,
                                  int epochs, bool freeze_first) {
    if (snapshots.size() < 2)
        throw std::invalid_argument("train: need at least 2 consecutive snapshots");
    if (stats_.per_var.empty())
        throw std::runtime_error("train: normalization not fitted");

    for (auto& n : nets_) n->set_first_layer_frozen(freeze_first);

    std::vector<const FieldState*> from, to;
    for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
        from.push_back(&snapshots[k]);
        to.push_back(&snapshots[k + 1]);
    }
    TrainBatch all = make_batch(*this, grid_, bcs_, stats_, from, to);
    TrainBatch val = make_batch(*this, grid_, bcs_, stats_, {from.back()},
                                {to.back()});

    auto val_loss = [&]() {
        double loss = 0.0;
        const double inv_rows = 1.0 / static_cast<double>(val.features.rows);
        for (std::size_t v = 0; v < nets_.size(); ++v) {
            Matrix pred = nets_[v]->forward(val.features, false);
            double l = 0.0;
            for (std::size_t i = 0; i < pred.rows; ++i) {
                const double d = pred.at(i, 0) - val.targets[v][i];
                l += d * d;
            }
            loss += l * inv_rows;
        }
        return loss;
    };

    TrainReport report;
    report.pairs_used = static_cast<int>(from.size());
    report.initial_val_loss = val_loss();
    report.best_val_loss = report.initial_val_loss;
    auto best = clone_nets();

    for (int e = 1; e <= epochs; ++e) {
        report.final_train_loss = loss_and_grads(all.features, all.targets, true);
        adam_step(opt_, tensors());
        const double vl = val_loss();
        if (vl < report.best_val_loss) {
            report.best_val_loss = vl;
            report.best_epoch = e;
            best = clone_nets();
        }
        report.epochs_run = e;
    }
    if (epochs > 0) restore_nets(best);
    for (auto& n : nets_) n->set_first_layer_frozen(false);
    return report;
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
            (v >> 24);
    }
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
            (v >> 24);
    }
    return v;
}

void write_f64(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r = (r << 8) | ((bits >> (8 * i)) & 0xffu);
        bits = r;
    }
    os.write(reinterpret_cast<const char*>(&bits), 8);
}

double read_f64(std::istream& is) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r = (r << 8) | ((bits >> (8 * i)) & 0xffu);
        bits = r;
    }
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

constexpr char kMagic[4] = {'X', 'R', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const SurrogateModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, model.shape_.kind == ModelKind::Dense ? 0 : 1);
    write_u32(os, static_cast<std::uint32_t>(model.shape_.axes));
    write_u32(os, static_cast<std::uint32_t>(model.shape_.hidden_width));
    write_u32(os, static_cast<std::uint32_t>(model.shape_.modes));
    write_u32(os, static_cast<std::uint32_t>(model.shape_.fourier_layers));
    write_f64(os, model.shape_.dropout);
    write_u32(os, static_cast<std::uint32_t>(model.stats_.per_var.size()));
    for (const auto& r : model.stats_.per_var) {
        write_f64(os, r.min);
        write_f64(os, r.max);
    }
    auto& self = const_cast<SurrogateModel&>(model);
    std::uint64_t count = 0;
    for (const TensorRef& ref : self.tensors()) count += ref.value->size();
    write_u32(os, static_cast<std::uint32_t>(count & 0xffffffffu));
    write_u32(os, static_cast<std::uint32_t>(count >> 32));
    for (const TensorRef& ref : self.tensors())
        for (double x : *ref.value) write_f64(os, x);
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

SurrogateModel load_checkpoint(const std::string& path, const StructuredGrid& grid,
                               const BoundarySpec& bcs, double dt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);
    ModelShape shape;
    shape.kind = read_u32(is) == 0 ? ModelKind::Dense : ModelKind::Spectral;
    shape.axes = static_cast<int>(read_u32(is));
    shape.hidden_width = read_u32(is);
    shape.modes = static_cast<int>(read_u32(is));
    shape.fourier_layers = static_cast<int>(read_u32(is));
    shape.dropout = read_f64(is);
    if (shape.axes != grid.axes)
        throw std::runtime_error("checkpoint: axis count does not match the case");
    const std::uint32_t n_vars = read_u32(is);
    SurrogateModel model(shape, grid, bcs, dt, 0);
    model.stats_.per_var.resize(n_vars);
    for (auto& r : model.stats_.per_var) {
        r.min = read_f64(is);
        r.max = read_f64(is);
    }
    const std::uint64_t lo = read_u32(is);
    const std::uint64_t hi = read_u32(is);
    const std::uint64_t count = (hi << 32) | lo;
    std::uint64_t seen = 0;
    for (const TensorRef& ref : model.tensors()) {
        for (double& x : *ref.value) {
            x = read_f64(is);
            ++seen;
        }
    }
    if (!is || seen != count)
        throw std::runtime_error("checkpoint: truncated or mismatched payload in " +
                                 path);
    return model;
}

}  // namespace hybridfv
