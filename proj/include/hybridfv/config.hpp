#pragma once

#include "hybridfv/hybrid.hpp"
#include "hybridfv/solver.hpp"
#include "hybridfv/surrogate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hybridfv {

/// Everything a run needs, parsed from a flat key = value file with
/// [section] headers.
struct CaseConfig {
    std::string name = "case";

    // [grid]
    std::vector<int> extents;
    std::vector<double> lengths;

    // [physics]
    double t_hot = 0, t_cold = 0;
    double rayleigh = 1e6, prandtl = 0.705;
    double gravity = 9.81;
    double beta = 0;  ///< 0: use 1 / t_ref
    double dt = 0;

    // [hybrid]
    HybridConfig hybrid;

    // [model]
    ModelKind model_kind = ModelKind::Dense;
    std::size_t hidden_width = 0;  ///< 0: architecture default (398 / 64)
    int modes = 12;
    int fourier_layers = 3;
    double dropout = 0.2;
    std::uint64_t seed = 1;

    // [pcg]
    double pcg_tol = 1e-8;
    int pcg_max_iter = 2000;

    // [output]
    std::string output_dir = "out";
    int threads = 1;

    void validate() const;  ///< throws naming the offending field
};

/// Parses and validates a config file. Parse errors carry the line number;
/// missing required keys and invariant violations carry the field name.
CaseConfig load_config(const std::string& path);

StructuredGrid build_grid(const CaseConfig& config);
PhysicsParams build_physics(const CaseConfig& config);
BoundarySpec build_boundaries(const CaseConfig& config);
ModelShape build_model_shape(const CaseConfig& config);
CaseSetup make_setup(const CaseConfig& config);

/// Output root from the config, overridable by HYBRIDFV_OUTPUT_ROOT.
std::string resolve_output_dir(const CaseConfig& config);

}  // namespace hybridfv
