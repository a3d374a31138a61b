#pragma once

#include "hybridfv/grid.hpp"

#include <vector>

namespace hybridfv {

/// Symmetric 5/7-point operator with constant per-axis off-diagonals and a
/// per-cell diagonal (boundary closures live in the diagonal). Assembled as
/// the negative Laplacian so that it is positive (semi-)definite.
struct StencilOperator {
    const StructuredGrid* grid = nullptr;
    std::array<double, 3> offdiag{0, 0, 0};  ///< coupling across interior faces
    Field diag;
    bool singular = false;  ///< pure-Neumann: nullspace is the constants

    Field apply(const Field& x) const;
    double inner(const Field& a, const Field& b) const;
};

/// A = -laplacian with the given closures; Dirichlet faces contribute
/// 2/dx^2 to the diagonal, NeumannZero faces contribute nothing. The
/// all-Neumann operator is singular with constant nullspace.
StencilOperator negative_laplacian(const StructuredGrid& g, const FieldBc& bc);

enum class Preconditioner { Jacobi, IncompleteCholesky };

struct PcgSettings {
    double tol = 1e-8;  ///< relative residual target, in (0,1)
    int max_iter = 1000;
    Preconditioner precond = Preconditioner::IncompleteCholesky;
};

struct PcgResult {
    Field x;
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_trace;  ///< best-so-far relative residuals
};

/// Preconditioned conjugate gradients. Singular pure-Neumann systems are
/// regularized by mean-projection of b and of the iterates; the solution
/// comes back with zero mean. Throws std::runtime_error on NaN breakdown.
PcgResult pcg_solve(const StencilOperator& A, const Field& b,
                    const PcgSettings& settings, const Field* x0 = nullptr);

}  // namespace hybridfv
