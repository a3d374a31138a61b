#include "hybridfv/pcg.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridfv {

namespace {

struct Strides {
    long s[3];
    int n[3];
};

Strides strides_of(const StructuredGrid& g) {
    Strides st;
    st.n[0] = g.dims[0];
    st.n[1] = g.dims[1];
    st.n[2] = g.dims[2];
    st.s[0] = 1;
    st.s[1] = g.dims[0];
    st.s[2] = static_cast<long>(g.dims[0]) * g.dims[1];
    return st;
}

void remove_mean(Field& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

}  // namespace

Field StencilOperator::apply(const Field& x) const {
    const auto& g = *grid;
    Field y(x.size());
    const Strides st = strides_of(g);
    for (int k = 0; k < st.n[2]; ++k)
        for (int j = 0; j < st.n[1]; ++j)
            for (int i = 0; i < st.n[0]; ++i) {
                const long c = (static_cast<long>(k) * st.n[1] + j) * st.n[0] + i;
                double acc = diag[c] * x[c];
                const int idx[3] = {i, j, k};
                for (int a = 0; a < g.axes; ++a) {
                    if (idx[a] > 0) acc += offdiag[a] * x[c - st.s[a]];
                    if (idx[a] < st.n[a] - 1) acc += offdiag[a] * x[c + st.s[a]];
                }
                y[c] = acc;
            }
    return y;
}

double StencilOperator::inner(const Field& a, const Field& b) const {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

StencilOperator negative_laplacian(const StructuredGrid& g, const FieldBc& bc) {
    StencilOperator op;
    op.grid = &g;
    op.diag.assign(g.cell_count(), 0.0);
    op.singular = true;
    for (int a = 0; a < g.axes; ++a) {
        const double w = 1.0 / (g.spacing[a] * g.spacing[a]);
        op.offdiag[a] = -w;
        for (int s = 0; s < 2; ++s)
            if (bc[2 * a + s].kind == BcKind::Dirichlet) op.singular = false;
    }
    const Strides st = strides_of(g);
    for (int k = 0; k < st.n[2]; ++k)
        for (int j = 0; j < st.n[1]; ++j)
            for (int i = 0; i < st.n[0]; ++i) {
                const long c = (static_cast<long>(k) * st.n[1] + j) * st.n[0] + i;
                const int idx[3] = {i, j, k};
                double d = 0;
                for (int a = 0; a < g.axes; ++a) {
                    const double w = 1.0 / (g.spacing[a] * g.spacing[a]);
                    if (idx[a] > 0) d += w;                       // interior face
                    else if (bc[2 * a].kind == BcKind::Dirichlet) d += 2 * w;
                    if (idx[a] < st.n[a] - 1) d += w;
                    else if (bc[2 * a + 1].kind == BcKind::Dirichlet) d += 2 * w;
                }
                op.diag[c] = d;
            }
    return op;
}

namespace {

// Diagonal-based incomplete Cholesky on the stencil structure: the
// off-diagonals are kept, only the diagonal is refactored.
Field dic_diagonal(const StencilOperator& A) {
    const auto& g = *A.grid;
    const Strides st = strides_of(g);
    Field rd(A.diag.size(), 0.0);
    for (int k = 0; k < st.n[2]; ++k)
        for (int j = 0; j < st.n[1]; ++j)
            for (int i = 0; i < st.n[0]; ++i) {
                const long c = (static_cast<long>(k) * st.n[1] + j) * st.n[0] + i;
                double d = A.diag[c];
                const int idx[3] = {i, j, k};
                for (int a = 0; a < g.axes; ++a)
                    if (idx[a] > 0)
                        d -= A.offdiag[a] * A.offdiag[a] * rd[c - st.s[a]];
                // Guard the singular all-Neumann case where trailing pivots
                // can collapse; fall back to the Jacobi pivot there.
                const double floor_val = 1e-12 * A.diag[c];
                rd[c] = d > floor_val ? 1.0 / d : 1.0 / A.diag[c];
            }
    return rd;
}

void dic_apply(const StencilOperator& A, const Field& rd, const Field& r,
               Field& z, Field& w) {
    const auto& g = *A.grid;
    const Strides st = strides_of(g);
    // forward sweep: (D + L) w = r, scaled by rd
    for (int k = 0; k < st.n[2]; ++k)
        for (int j = 0; j < st.n[1]; ++j)
            for (int i = 0; i < st.n[0]; ++i) {
                const long c = (static_cast<long>(k) * st.n[1] + j) * st.n[0] + i;
                double acc = r[c];
                const int idx[3] = {i, j, k};
                for (int a = 0; a < g.axes; ++a)
                    if (idx[a] > 0) acc -= A.offdiag[a] * w[c - st.s[a]];
                w[c] = acc * rd[c];
            }
    // backward sweep: (I + rd*U) z = w
    for (int k = st.n[2] - 1; k >= 0; --k)
        for (int j = st.n[1] - 1; j >= 0; --j)
            for (int i = st.n[0] - 1; i >= 0; --i) {
                const long c = (static_cast<long>(k) * st.n[1] + j) * st.n[0] + i;
                double acc = w[c];
                const int idx[3] = {i, j, k};
                for (int a = 0; a < g.axes; ++a)
                    if (idx[a] < st.n[a] - 1) acc -= rd[c] * A.offdiag[a] * z[c + st.s[a]];
                z[c] = acc;
            }
}

double norm2(const Field& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

PcgResult pcg_solve(const StencilOperator& A, const Field& b,
                    const PcgSettings& settings, const Field* x0) {
    if (settings.tol <= 0 || settings.tol >= 1)
        throw std::invalid_argument("pcg: tol must be in (0,1)");
    if (settings.max_iter < 1)
        throw std::invalid_argument("pcg: max_iter must be >= 1");

    const std::size_t n = b.size();
    PcgResult res;
    Field rhs = b;
    if (A.singular) remove_mean(rhs);

    res.x = x0 ? *x0 : Field(n, 0.0);
    if (A.singular && x0) remove_mean(res.x);

    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        return res;
    }

    Field r = A.apply(res.x);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];

    Field rd;
    if (settings.precond == Preconditioner::IncompleteCholesky) rd = dic_diagonal(A);

    Field z(n), w(n), p(n), Ap(n);
    auto precondition = [&](const Field& rin, Field& zout) {
        if (settings.precond == Preconditioner::IncompleteCholesky) {
            dic_apply(A, rd, rin, zout, w);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                zout[i] = A.diag[i] > 0 ? rin[i] / A.diag[i] : rin[i];
        }
        if (A.singular) remove_mean(zout);
    };

    precondition(r, z);
    p = z;
    double rz = A.inner(r, z);

    double best = norm2(r) / bnorm;
    Field best_x = res.x;
    res.residual_trace.push_back(best);

    for (int it = 1; it <= settings.max_iter; ++it) {
        Ap = A.apply(p);
        const double pAp = A.inner(p, Ap);
        if (!(pAp > 0) || !std::isfinite(pAp)) {
            if (!std::isfinite(pAp)) throw std::runtime_error("pcg: NaN breakdown");
            break;  // stagnation on a (semi-)definite system
        }
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        res.iterations = it;
        const double rel = norm2(r) / bnorm;
        if (!std::isfinite(rel)) throw std::runtime_error("pcg: NaN breakdown");
        if (rel < best) {
            best = rel;
            best_x = res.x;
        }
        res.residual_trace.push_back(best);
        if (rel <= settings.tol) {
            res.converged = true;
            break;
        }
        precondition(r, z);
        const double rz_new = A.inner(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    res.x = best_x;
    res.rel_residual = best;
    if (A.singular) remove_mean(res.x);
    return res;
}

}  // namespace hybridfv
