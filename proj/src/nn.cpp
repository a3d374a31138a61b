#include "hybridfv/nn.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace hybridfv {

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::size_t in, std::size_t out)
    : in_dim(in), out_dim(out), W(out, in), gW(out, in), b(out, 0.0), gb(out, 0.0) {}

void Linear::init(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim));
    for (double& w : W.data) w = rng.uniform(-bound, bound);
    for (double& v : b) v = 0.0;
}

Matrix Linear::forward(const Matrix& x) {
    if (x.cols != in_dim) throw std::invalid_argument("linear: input width mismatch");
    x_cache_ = x;
    // transpose once per call: the row-streaming product is much faster
    // than the dot-product form and the transpose is O(batch) smaller
    Matrix wt(in_dim, out_dim);
    for (std::size_t o = 0; o < out_dim; ++o)
        for (std::size_t i = 0; i < in_dim; ++i) wt.at(i, o) = W.at(o, i);
    Matrix y;
    gemm_nn(x, wt, y);
    for (std::size_t i = 0; i < y.rows; ++i) {
        double* row = y.row(i);
        for (std::size_t j = 0; j < out_dim; ++j) row[j] += b[j];
    }
    return y;
}

Matrix Linear::backward(const Matrix& gy) {
    gemm_tn(gy, x_cache_, gW);
    for (std::size_t j = 0; j < out_dim; ++j) gb[j] = 0.0;
    for (std::size_t i = 0; i < gy.rows; ++i) {
        const double* row = gy.row(i);
        for (std::size_t j = 0; j < out_dim; ++j) gb[j] += row[j];
    }
    if (frozen) {
        for (double& g : gW.data) g = 0.0;
        for (double& g : gb) g = 0.0;
    }
    Matrix gx;
    gemm_nn(gy, W, gx);
    return gx;
}

void Linear::visit(const std::string& prefix, bool trainable, const TensorVisitor& v) {
    v({prefix + ".W", &W.data, &gW.data, TensorRole::Parameter, trainable && !frozen});
    v({prefix + ".b", &b, &gb, TensorRole::Parameter, trainable && !frozen});
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::size_t d)
    : dim(d), gamma(d, 1.0), beta(d, 0.0), running_mean(d, 0.0),
      running_var(d, 1.0), ggamma(d, 0.0), gbeta(d, 0.0) {}

Matrix BatchNorm::forward(const Matrix& x, bool train) {
    Matrix y(x.rows, x.cols);
    if (!train) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double istd = 1.0 / std::sqrt(running_var[j] + eps);
            for (std::size_t i = 0; i < x.rows; ++i)
                y.at(i, j) = gamma[j] * (x.at(i, j) - running_mean[j]) * istd + beta[j];
        }
        return y;
    }
    const double m = static_cast<double>(x.rows);
    xhat_ = Matrix(x.rows, x.cols);
    invstd_.assign(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) mean += x.at(i, j);
        mean /= m;
        double var = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double d = x.at(i, j) - mean;
            var += d * d;
        }
        var /= m;  // biased, as used for normalization
        const double istd = 1.0 / std::sqrt(var + eps);
        invstd_[j] = istd;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double xh = (x.at(i, j) - mean) * istd;
            xhat_.at(i, j) = xh;
            y.at(i, j) = gamma[j] * xh + beta[j];
        }
        const double unbiased = m > 1 ? var * m / (m - 1) : var;
        running_mean[j] = (1 - momentum) * running_mean[j] + momentum * mean;
        running_var[j] = (1 - momentum) * running_var[j] + momentum * unbiased;
    }
    return y;
}

Matrix BatchNorm::backward(const Matrix& gy) {
    const double m = static_cast<double>(gy.rows);
    Matrix gx(gy.rows, gy.cols);
    for (std::size_t j = 0; j < dim; ++j) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::size_t i = 0; i < gy.rows; ++i) {
            sum_gy += gy.at(i, j);
            sum_gy_xhat += gy.at(i, j) * xhat_.at(i, j);
        }
        ggamma[j] = sum_gy_xhat;
        gbeta[j] = sum_gy;
        const double scale = gamma[j] * invstd_[j] / m;
        for (std::size_t i = 0; i < gy.rows; ++i)
            gx.at(i, j) = scale * (m * gy.at(i, j) - sum_gy -
                                   xhat_.at(i, j) * sum_gy_xhat);
    }
    return gx;
}

void BatchNorm::visit(const std::string& prefix, const TensorVisitor& v) {
    v({prefix + ".gamma", &gamma, &ggamma, TensorRole::Parameter, true});
    v({prefix + ".beta", &beta, &gbeta, TensorRole::Parameter, true});
    v({prefix + ".running_mean", &running_mean, nullptr, TensorRole::Statistic, false});
    v({prefix + ".running_var", &running_var, nullptr, TensorRole::Statistic, false});
}

// ---------------------------------------------------------------------------
// ReLU / Dropout

Matrix ReLU::forward(const Matrix& x) {
    mask_ = Matrix(x.rows, x.cols);
    Matrix y(x.rows, x.cols);
    margin_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const bool pos = x.data[i] > 0;
        mask_.data[i] = pos ? 1.0 : 0.0;
        y.data[i] = pos ? x.data[i] : 0.0;
        margin_ = std::min(margin_, std::abs(x.data[i]));
    }
    return y;
}

Matrix ReLU::backward(const Matrix& gy) {
    Matrix gx(gy.rows, gy.cols);
    for (std::size_t i = 0; i < gy.data.size(); ++i)
        gx.data[i] = gy.data[i] * mask_.data[i];
    return gx;
}

Matrix Dropout::forward(const Matrix& x, bool train, Rng& rng) {
    active_ = train && rate > 0.0;
    if (!active_) return x;
    const double keep = 1.0 - rate;
    mask_ = Matrix(x.rows, x.cols);
    Matrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double m = rng.keep(keep) ? 1.0 / keep : 0.0;
        mask_.data[i] = m;
        y.data[i] = x.data[i] * m;
    }
    return y;
}

Matrix Dropout::backward(const Matrix& gy) {
    if (!active_) return gy;
    Matrix gx(gy.rows, gy.cols);
    for (std::size_t i = 0; i < gy.data.size(); ++i)
        gx.data[i] = gy.data[i] * mask_.data[i];
    return gx;
}

// ---------------------------------------------------------------------------
// Lift

Lift::Lift(std::size_t w) : width(w), W(w, 0.0), b(w, 0.0), gW(w, 0.0), gb(w, 0.0) {}

void Lift::init(Rng& rng) {
    const double bound = std::sqrt(6.0);  // fan-in is 1
    for (double& w : W) w = rng.uniform(-bound, bound);
}

Cube Lift::forward(const Matrix& x) {
    x_cache_ = x;
    Cube h(x.rows, width, x.cols);
    for (std::size_t bi = 0; bi < x.rows; ++bi)
        for (std::size_t ci = 0; ci < width; ++ci) {
            double* out = h.slice(bi, ci);
            const double* in = x.row(bi);
            const double w = W[ci], bias = b[ci];
            for (std::size_t ni = 0; ni < x.cols; ++ni) out[ni] = w * in[ni] + bias;
        }
    return h;
}

void Lift::backward(const Cube& gh) {
    for (std::size_t ci = 0; ci < width; ++ci) {
        gW[ci] = 0.0;
        gb[ci] = 0.0;
    }
    for (std::size_t bi = 0; bi < gh.b; ++bi)
        for (std::size_t ci = 0; ci < width; ++ci) {
            const double* g = gh.slice(bi, ci);
            const double* in = x_cache_.row(bi);
            double sw = 0.0, sb = 0.0;
            for (std::size_t ni = 0; ni < gh.n; ++ni) {
                sw += g[ni] * in[ni];
                sb += g[ni];
            }
            gW[ci] += sw;
            gb[ci] += sb;
        }
    if (frozen) {
        for (double& g : gW) g = 0.0;
        for (double& g : gb) g = 0.0;
    }
}

void Lift::visit(const std::string& prefix, bool trainable, const TensorVisitor& v) {
    v({prefix + ".W", &W, &gW, TensorRole::Parameter, trainable && !frozen});
    v({prefix + ".b", &b, &gb, TensorRole::Parameter, trainable && !frozen});
}

// ---------------------------------------------------------------------------
// ChannelNorm

ChannelNorm::ChannelNorm(std::size_t c)
    : channels(c), gamma(c, 1.0), beta(c, 0.0), running_mean(c, 0.0),
      running_var(c, 1.0), ggamma(c, 0.0), gbeta(c, 0.0) {}

Cube ChannelNorm::forward(const Cube& x, bool train) {
    Cube y(x.b, x.c, x.n);
    if (!train) {
        for (std::size_t ci = 0; ci < channels; ++ci) {
            const double istd = 1.0 / std::sqrt(running_var[ci] + eps);
            for (std::size_t bi = 0; bi < x.b; ++bi) {
                const double* in = x.slice(bi, ci);
                double* out = y.slice(bi, ci);
                for (std::size_t ni = 0; ni < x.n; ++ni)
                    out[ni] = gamma[ci] * (in[ni] - running_mean[ci]) * istd + beta[ci];
            }
        }
        return y;
    }
    const double m = static_cast<double>(x.b * x.n);
    xhat_ = Cube(x.b, x.c, x.n);
    invstd_.assign(channels, 0.0);
    for (std::size_t ci = 0; ci < channels; ++ci) {
        double mean = 0.0;
        for (std::size_t bi = 0; bi < x.b; ++bi) {
            const double* in = x.slice(bi, ci);
            for (std::size_t ni = 0; ni < x.n; ++ni) mean += in[ni];
        }
        mean /= m;
        double var = 0.0;
        for (std::size_t bi = 0; bi < x.b; ++bi) {
            const double* in = x.slice(bi, ci);
            for (std::size_t ni = 0; ni < x.n; ++ni) {
                const double d = in[ni] - mean;
                var += d * d;
            }
        }
        var /= m;
        const double istd = 1.0 / std::sqrt(var + eps);
        invstd_[ci] = istd;
        for (std::size_t bi = 0; bi < x.b; ++bi) {
            const double* in = x.slice(bi, ci);
            double* xh = xhat_.slice(bi, ci);
            double* out = y.slice(bi, ci);
            for (std::size_t ni = 0; ni < x.n; ++ni) {
                xh[ni] = (in[ni] - mean) * istd;
                out[ni] = gamma[ci] * xh[ni] + beta[ci];
            }
        }
        const double unbiased = m > 1 ? var * m / (m - 1) : var;
        running_mean[ci] = (1 - momentum) * running_mean[ci] + momentum * mean;
        running_var[ci] = (1 - momentum) * running_var[ci] + momentum * unbiased;
    }
    return y;
}

Cube ChannelNorm::backward(const Cube& gy) {
    const double m = static_cast<double>(gy.b * gy.n);
    Cube gx(gy.b, gy.c, gy.n);
    for (std::size_t ci = 0; ci < channels; ++ci) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::size_t bi = 0; bi < gy.b; ++bi) {
            const double* g = gy.slice(bi, ci);
            const double* xh = xhat_.slice(bi, ci);
            for (std::size_t ni = 0; ni < gy.n; ++ni) {
                sum_gy += g[ni];
                sum_gy_xhat += g[ni] * xh[ni];
            }
        }
        ggamma[ci] = sum_gy_xhat;
        gbeta[ci] = sum_gy;
        const double scale = gamma[ci] * invstd_[ci] / m;
        for (std::size_t bi = 0; bi < gy.b; ++bi) {
            const double* g = gy.slice(bi, ci);
            const double* xh = xhat_.slice(bi, ci);
            double* out = gx.slice(bi, ci);
            for (std::size_t ni = 0; ni < gy.n; ++ni)
                out[ni] = scale * (m * g[ni] - sum_gy - xh[ni] * sum_gy_xhat);
        }
    }
    return gx;
}

void ChannelNorm::visit(const std::string& prefix, const TensorVisitor& v) {
    v({prefix + ".gamma", &gamma, &ggamma, TensorRole::Parameter, true});
    v({prefix + ".beta", &beta, &gbeta, TensorRole::Parameter, true});
    v({prefix + ".running_mean", &running_mean, nullptr, TensorRole::Statistic, false});
    v({prefix + ".running_var", &running_var, nullptr, TensorRole::Statistic, false});
}

// ---------------------------------------------------------------------------
// SpectralConv

SpectralConv::SpectralConv(std::size_t w, int positions_, int modes)
    : width(w), positions(positions_), dft_(positions_) {
    modes_kept = std::min(modes, dft_.bins);
    const std::size_t rsize = width * width * static_cast<std::size_t>(modes_kept);
    Rre.assign(rsize, 0.0);
    Rim.assign(rsize, 0.0);
    gRre.assign(rsize, 0.0);
    gRim.assign(rsize, 0.0);
    Wl.assign(width * width, 0.0);
    bl.assign(width, 0.0);
    gWl.assign(width * width, 0.0);
    gbl.assign(width, 0.0);
}

void SpectralConv::init(Rng& rng) {
    const double rscale = 1.0 / static_cast<double>(width);
    for (std::size_t i = 0; i < Rre.size(); ++i) {
        Rre[i] = rng.uniform(-rscale, rscale);
        Rim[i] = rng.uniform(-rscale, rscale);
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(width));
    for (double& w : Wl) w = rng.uniform(-bound, bound);
    for (double& v : bl) v = 0.0;
}

Cube SpectralConv::forward(const Cube& h) {
    const std::size_t B = h.b, C = width, N = h.n;
    const int K = dft_.bins;
    h_cache_ = h;
    spec_re_.assign(B * C * K, 0.0);
    spec_im_.assign(B * C * K, 0.0);
    Cube y(B, C, N);

    std::vector<double> yre(K), yim(K), buf(N);
    for (std::size_t bi = 0; bi < B; ++bi) {
        // rfft of every input channel
        for (std::size_t ci = 0; ci < C; ++ci)
            dft_.forward(h.slice(bi, ci),
                          spec_re_.data() + (bi * C + ci) * K,
                          spec_im_.data() + (bi * C + ci) * K);
        for (std::size_t co = 0; co < C; ++co) {
            for (int k = 0; k < K; ++k) {
                yre[k] = 0.0;
                yim[k] = 0.0;
            }
            for (std::size_t ci = 0; ci < C; ++ci) {
                const double* hre = spec_re_.data() + (bi * C + ci) * K;
                const double* him = spec_im_.data() + (bi * C + ci) * K;
                for (int k = 0; k < modes_kept; ++k) {
                    const double rre = Rre[ridx(ci, co, k)];
                    const double rim = Rim[ridx(ci, co, k)];
                    yre[k] += hre[k] * rre - him[k] * rim;
                    yim[k] += hre[k] * rim + him[k] * rre;
                }
            }
            dft_.inverse(yre.data(), yim.data(), buf.data());
            double* out = y.slice(bi, co);
            const double bias = bl[co];
            for (std::size_t ni = 0; ni < N; ++ni) out[ni] = buf[ni] + bias;
            // local pointwise map
            for (std::size_t ci = 0; ci < C; ++ci) {
                const double w = Wl[co * C + ci];
                if (w == 0.0) continue;
                const double* in = h.slice(bi, ci);
                for (std::size_t ni = 0; ni < N; ++ni) out[ni] += w * in[ni];
            }
        }
    }
    return y;
}

Cube SpectralConv::backward(const Cube& gy) {
    const std::size_t B = gy.b, C = width, N = gy.n;
    const int K = dft_.bins;
    Cube gh(B, C, N);
    std::fill(gRre.begin(), gRre.end(), 0.0);
    std::fill(gRim.begin(), gRim.end(), 0.0);
    std::fill(gWl.begin(), gWl.end(), 0.0);
    std::fill(gbl.begin(), gbl.end(), 0.0);

    std::vector<double> gyre(B * C * K), gyim(B * C * K);
    std::vector<double> ghre(K), ghim(K), buf(N);

    for (std::size_t bi = 0; bi < B; ++bi) {
        for (std::size_t co = 0; co < C; ++co) {
            const double* g = gy.slice(bi, co);
            // bias and local-path gradients
            double sb = 0.0;
            for (std::size_t ni = 0; ni < N; ++ni) sb += g[ni];
            gbl[co] += sb;
            for (std::size_t ci = 0; ci < C; ++ci) {
                const double* in = h_cache_.slice(bi, ci);
                double acc = 0.0;
                for (std::size_t ni = 0; ni < N; ++ni) acc += g[ni] * in[ni];
                gWl[co * C + ci] += acc;
            }
            // spectrum cotangent of this output channel
            dft_.inverse_adjoint(g, gyre.data() + (bi * C + co) * K,
                                  gyim.data() + (bi * C + co) * K);
        }
        // gradients through the mode mixing
        for (std::size_t ci = 0; ci < C; ++ci) {
            for (int k = 0; k < K; ++k) {
                ghre[k] = 0.0;
                ghim[k] = 0.0;
            }
            const double* hre = spec_re_.data() + (bi * C + ci) * K;
            const double* him = spec_im_.data() + (bi * C + ci) * K;
            for (std::size_t co = 0; co < C; ++co) {
                const double* gre = gyre.data() + (bi * C + co) * K;
                const double* gim = gyim.data() + (bi * C + co) * K;
                for (int k = 0; k < modes_kept; ++k) {
                    const std::size_t r = ridx(ci, co, k);
                    ghre[k] += gre[k] * Rre[r] + gim[k] * Rim[r];
                    ghim[k] += -gre[k] * Rim[r] + gim[k] * Rre[r];
                    gRre[r] += gre[k] * hre[k] + gim[k] * him[k];
                    gRim[r] += -gre[k] * him[k] + gim[k] * hre[k];
                }
            }
            dft_.forward_adjoint(ghre.data(), ghim.data(), buf.data());
            double* out = gh.slice(bi, ci);
            for (std::size_t ni = 0; ni < N; ++ni) out[ni] = buf[ni];
            // local path input gradient
            for (std::size_t co = 0; co < C; ++co) {
                const double w = Wl[co * C + ci];
                if (w == 0.0) continue;
                const double* g = gy.slice(bi, co);
                for (std::size_t ni = 0; ni < N; ++ni) out[ni] += w * g[ni];
            }
        }
    }
    return gh;
}

void SpectralConv::visit(const std::string& prefix, bool trainable,
                         const TensorVisitor& v) {
    v({prefix + ".Rre", &Rre, &gRre, TensorRole::Parameter, trainable});
    v({prefix + ".Rim", &Rim, &gRim, TensorRole::Parameter, trainable});
    v({prefix + ".W", &Wl, &gWl, TensorRole::Parameter, trainable});
    v({prefix + ".b", &bl, &gbl, TensorRole::Parameter, trainable});
}

Cube CubeReLU::forward(const Cube& x) {
    mask_ = Cube(x.b, x.c, x.n);
    Cube y(x.b, x.c, x.n);
    margin_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const bool pos = x.data[i] > 0;
        mask_.data[i] = pos ? 1.0 : 0.0;
        y.data[i] = pos ? x.data[i] : 0.0;
        margin_ = std::min(margin_, std::abs(x.data[i]));
    }
    return y;
}

Cube CubeReLU::backward(const Cube& gy) {
    Cube gx(gy.b, gy.c, gy.n);
    for (std::size_t i = 0; i < gy.data.size(); ++i)
        gx.data[i] = gy.data[i] * mask_.data[i];
    return gx;
}

// ---------------------------------------------------------------------------
// DenseNet

DenseNet::DenseNet(const DenseShape& shape, Rng& rng, Rng* dropout_rng)
    : shape_(shape),
      l1_(shape.input, shape.width), l2_(shape.width, shape.width),
      l3_(shape.width, shape.width), l4_(shape.width, shape.width),
      l5_(shape.width, 1),
      bn1_(shape.width), bn2_(shape.width), bn3_(shape.width), bn4_(shape.width),
      drop_(shape.dropout), dropout_rng_(dropout_rng) {
    l1_.init(rng);
    l2_.init(rng);
    l3_.init(rng);
    l4_.init(rng);
    l5_.init(rng);
}

Matrix DenseNet::forward(const Matrix& features, bool train) {
    Matrix h = r1_.forward(bn1_.forward(l1_.forward(features), train));
    h = r2_.forward(bn2_.forward(l2_.forward(h), train));
    h = r3_.forward(bn3_.forward(l3_.forward(h), train));
    h = r4_.forward(bn4_.forward(l4_.forward(h), train));
    h = drop_.forward(h, train, *dropout_rng_);
    return l5_.forward(h);
}

void DenseNet::backward(const Matrix& gy) {
    Matrix g = l5_.backward(gy);
    g = drop_.backward(g);
    g = l4_.backward(bn4_.backward(r4_.backward(g)));
    g = l3_.backward(bn3_.backward(r3_.backward(g)));
    g = l2_.backward(bn2_.backward(r2_.backward(g)));
    (void)l1_.backward(bn1_.backward(r1_.backward(g)));
}

void DenseNet::visit_tensors(const std::string& prefix, const TensorVisitor& v) {
    l1_.visit(prefix + ".l1", true, v);
    bn1_.visit(prefix + ".bn1", v);
    l2_.visit(prefix + ".l2", true, v);
    bn2_.visit(prefix + ".bn2", v);
    l3_.visit(prefix + ".l3", true, v);
    bn3_.visit(prefix + ".bn3", v);
    l4_.visit(prefix + ".l4", true, v);
    bn4_.visit(prefix + ".bn4", v);
    l5_.visit(prefix + ".l5", true, v);
}

void DenseNet::set_first_layer_frozen(bool frozen) { l1_.frozen = frozen; }

double DenseNet::activation_margin() const {
    double m = r1_.last_margin();
    m = std::min(m, r2_.last_margin());
    m = std::min(m, r3_.last_margin());
    m = std::min(m, r4_.last_margin());
    return m;
}

std::unique_ptr<SubNetwork> DenseNet::clone() const {
    return std::make_unique<DenseNet>(*this);
}

// ---------------------------------------------------------------------------
// SpectralNet

SpectralNet::SpectralNet(const SpectralShape& shape, Rng& rng, Rng* dropout_rng)
    : shape_(shape), lift_(shape.width), bn_lift_(shape.width),
      bn_flat_(shape.width * shape.input), drop_(shape.dropout),
      proj_(shape.width * shape.input, 1), dropout_rng_(dropout_rng) {
    lift_.init(rng);
    convs_.reserve(shape.layers);
    for (int l = 0; l < shape.layers; ++l) {
        convs_.emplace_back(shape.width, static_cast<int>(shape.input), shape.modes);
        convs_.back().init(rng);
    }
    relus_.resize(shape.layers);
    norms_.assign(shape.layers, ChannelNorm(shape.width));
    proj_.init(rng);
}

Matrix SpectralNet::forward(const Matrix& features, bool train) {
    batch_cache_ = features.rows;
    Cube h = bn_lift_.forward(lift_.forward(features), train);
    for (std::size_t l = 0; l < convs_.size(); ++l)
        h = norms_[l].forward(relus_[l].forward(convs_[l].forward(h)), train);
    Matrix flat(h.b, h.c * h.n);
    std::copy(h.data.begin(), h.data.end(), flat.data.begin());
    Matrix z = bn_flat_.forward(flat, train);
    z = drop_.forward(z, train, *dropout_rng_);
    return proj_.forward(z);
}

void SpectralNet::backward(const Matrix& gy) {
    Matrix g = proj_.backward(gy);
    g = drop_.backward(g);
    g = bn_flat_.backward(g);
    Cube gh(batch_cache_, shape_.width, shape_.input);
    std::copy(g.data.begin(), g.data.end(), gh.data.begin());
    for (int l = static_cast<int>(convs_.size()) - 1; l >= 0; --l)
        gh = convs_[l].backward(relus_[l].backward(norms_[l].backward(gh)));
    lift_.backward(bn_lift_.backward(gh));
}

void SpectralNet::visit_tensors(const std::string& prefix, const TensorVisitor& v) {
    lift_.visit(prefix + ".lift", true, v);
    bn_lift_.visit(prefix + ".bn_lift", v);
    for (std::size_t l = 0; l < convs_.size(); ++l) {
        const std::string lp = prefix + ".fourier" + std::to_string(l);
        convs_[l].visit(lp, true, v);
        norms_[l].visit(lp + ".bn", v);
    }
    bn_flat_.visit(prefix + ".bn_flat", v);
    proj_.visit(prefix + ".proj", true, v);
}

void SpectralNet::set_first_layer_frozen(bool frozen) { lift_.frozen = frozen; }

double SpectralNet::activation_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : relus_) m = std::min(m, r.last_margin());
    return m;
}

std::unique_ptr<SubNetwork> SpectralNet::clone() const {
    auto copy = std::make_unique<SpectralNet>(*this);
    return copy;
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(AdamState& opt, const std::vector<TensorRef>& tensors) {
    opt.t += 1;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    for (const TensorRef& ref : tensors) {
        if (ref.role != TensorRole::Parameter || !ref.trainable) continue;
        auto& [m, v] = opt.moments[ref.name];
        if (m.size() != ref.value->size()) {
            m.assign(ref.value->size(), 0.0);
            v.assign(ref.value->size(), 0.0);
        }
        std::vector<double>& theta = *ref.value;
        const std::vector<double>& g = *ref.grad;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = opt.beta1 * m[i] + (1 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1 - opt.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
        }
    }
}

std::vector<TensorRef> collect_tensors(SubNetwork& net, const std::string& prefix) {
    std::vector<TensorRef> out;
    net.visit_tensors(prefix, [&](const TensorRef& r) { out.push_back(r); });
    return out;
}

}  // namespace hybridfv
