#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace hybridfv {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

/// C = A(m x k) * B(k x n)
void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C);
/// C = A(m x k) * B(n x k)^T
void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C);
/// C = A(k x m)^T * B(k x n)
void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C);

/// (batch, channels, positions) cube, row-major with positions fastest.
struct Cube {
    std::size_t b = 0, c = 0, n = 0;
    std::vector<double> data;

    Cube() = default;
    Cube(std::size_t b_, std::size_t c_, std::size_t n_, double fill = 0.0)
        : b(b_), c(c_), n(n_), data(b_ * c_ * n_, fill) {}

    double& at(std::size_t bi, std::size_t ci, std::size_t ni) {
        return data[(bi * c + ci) * n + ni];
    }
    double at(std::size_t bi, std::size_t ci, std::size_t ni) const {
        return data[(bi * c + ci) * n + ni];
    }
    double* slice(std::size_t bi, std::size_t ci) {
        return data.data() + (bi * c + ci) * n;
    }
    const double* slice(std::size_t bi, std::size_t ci) const {
        return data.data() + (bi * c + ci) * n;
    }
};

/// Deterministic RNG stream for init and dropout.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }
    bool keep(double keep_prob) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(eng_) < keep_prob;
    }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// Real-input DFT of length n evaluated by explicit O(n^2) matrices --
/// the feature axis is short, and the explicit form gives exact adjoints.
struct RealDft {
    int n = 0;
    int bins = 0;  ///< n/2 + 1
    std::vector<double> cosm, sinm;  // bins x n

    RealDft() = default;
    explicit RealDft(int length);

    void forward(const double* x, double* re, double* im) const;
    void inverse(const double* re, const double* im, double* x) const;
    /// Adjoint of forward: maps spectrum cotangents to input cotangents.
    void forward_adjoint(const double* gre, const double* gim, double* gx) const;
    /// Adjoint of inverse: maps output cotangents to spectrum cotangents.
    void inverse_adjoint(const double* gx, double* gre, double* gim) const;

    double mode_weight(int k) const {
        return (k == 0 || (n % 2 == 0 && k == n / 2)) ? 1.0 : 2.0;
    }
};

}  // namespace hybridfv
