#include "hybridfv/tensor.hpp"

#include <cassert>
#include <cmath>

namespace hybridfv {

void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C) {
    assert(A.cols == B.rows);
    C = Matrix(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        double* crow = C.row(i);
        const double* arow = A.row(i);
        for (std::size_t p = 0; p < A.cols; ++p) {
            const double a = arow[p];
            if (a == 0.0) continue;
            const double* brow = B.row(p);
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += a * brow[j];
        }
    }
}

void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C) {
    assert(A.cols == B.cols);
    C = Matrix(A.rows, B.rows);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = A.row(i);
        double* crow = C.row(i);
        for (std::size_t j = 0; j < B.rows; ++j) {
            const double* brow = B.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < A.cols; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C) {
    assert(A.rows == B.rows);
    C = Matrix(A.cols, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = A.row(i);
        const double* brow = B.row(i);
        for (std::size_t p = 0; p < A.cols; ++p) {
            const double a = arow[p];
            if (a == 0.0) continue;
            double* crow = C.row(p);
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += a * brow[j];
        }
    }
}

RealDft::RealDft(int length) : n(length), bins(length / 2 + 1) {
    cosm.resize(static_cast<std::size_t>(bins) * n);
    sinm.resize(static_cast<std::size_t>(bins) * n);
    const double two_pi = 2.0 * M_PI;
    for (int k = 0; k < bins; ++k)
        for (int j = 0; j < n; ++j) {
            const double arg = two_pi * j * k / n;
            cosm[static_cast<std::size_t>(k) * n + j] = std::cos(arg);
            sinm[static_cast<std::size_t>(k) * n + j] = std::sin(arg);
        }
}

void RealDft::forward(const double* x, double* re, double* im) const {
    for (int k = 0; k < bins; ++k) {
        const double* ck = cosm.data() + static_cast<std::size_t>(k) * n;
        const double* sk = sinm.data() + static_cast<std::size_t>(k) * n;
        double sre = 0.0, sim = 0.0;
        for (int j = 0; j < n; ++j) {
            sre += x[j] * ck[j];
            sim -= x[j] * sk[j];
        }
        re[k] = sre;
        im[k] = sim;
    }
}

void RealDft::inverse(const double* re, const double* im, double* x) const {
    for (int j = 0; j < n; ++j) x[j] = 0.0;
    for (int k = 0; k < bins; ++k) {
        const double wk = mode_weight(k) / n;
        const double* ck = cosm.data() + static_cast<std::size_t>(k) * n;
        const double* sk = sinm.data() + static_cast<std::size_t>(k) * n;
        for (int j = 0; j < n; ++j)
            x[j] += wk * (re[k] * ck[j] - im[k] * sk[j]);
    }
}

void RealDft::forward_adjoint(const double* gre, const double* gim,
                              double* gx) const {
    for (int j = 0; j < n; ++j) gx[j] = 0.0;
    for (int k = 0; k < bins; ++k) {
        const double* ck = cosm.data() + static_cast<std::size_t>(k) * n;
        const double* sk = sinm.data() + static_cast<std::size_t>(k) * n;
        for (int j = 0; j < n; ++j)
            gx[j] += gre[k] * ck[j] - gim[k] * sk[j];
    }
}

void RealDft::inverse_adjoint(const double* gx, double* gre, double* gim) const {
    for (int k = 0; k < bins; ++k) {
        const double wk = mode_weight(k) / n;
        const double* ck = cosm.data() + static_cast<std::size_t>(k) * n;
        const double* sk = sinm.data() + static_cast<std::size_t>(k) * n;
        double sre = 0.0, sim = 0.0;
        for (int j = 0; j < n; ++j) {
            sre += gx[j] * ck[j];
            sim -= gx[j] * sk[j];
        }
        gre[k] = wk * sre;
        gim[k] = wk * sim;
    }
}

}  // namespace hybridfv
