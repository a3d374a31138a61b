#pragma once

#include "hybridfv/tensor.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hybridfv {

enum class TensorRole { Parameter, Statistic };

/// Named view of one tensor inside a network; grad is null for statistics.
struct TensorRef {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    TensorRole role = TensorRole::Parameter;
    bool trainable = true;
};

using TensorVisitor = std::function<void(const TensorRef&)>;

// ---------------------------------------------------------------------------
// layers

class Linear {
public:
    Linear() = default;
    Linear(std::size_t in, std::size_t out);
    void init(Rng& rng);  // Kaiming-style uniform, fan-in scaled
    Matrix forward(const Matrix& x);
    Matrix backward(const Matrix& gy);
    void visit(const std::string& prefix, bool trainable, const TensorVisitor& v);

    std::size_t in_dim = 0, out_dim = 0;
    Matrix W, gW;  // out x in
    std::vector<double> b, gb;
    bool frozen = false;

private:
    Matrix x_cache_;
};

class BatchNorm {
public:
    BatchNorm() = default;
    explicit BatchNorm(std::size_t dim);
    Matrix forward(const Matrix& x, bool train);
    Matrix backward(const Matrix& gy);
    void visit(const std::string& prefix, const TensorVisitor& v);

    std::size_t dim = 0;
    std::vector<double> gamma, beta, running_mean, running_var, ggamma, gbeta;
    double momentum = 0.1, eps = 1e-5;

private:
    Matrix xhat_;
    std::vector<double> invstd_;
};

class ReLU {
public:
    Matrix forward(const Matrix& x);
    Matrix backward(const Matrix& gy);
    double last_margin() const { return margin_; }  ///< min |input| seen

private:
    Matrix mask_;
    double margin_ = 0.0;
};

class Dropout {
public:
    Dropout() = default;
    explicit Dropout(double rate) : rate(rate) {}
    Matrix forward(const Matrix& x, bool train, Rng& rng);
    Matrix backward(const Matrix& gy);

    double rate = 0.0;

private:
    Matrix mask_;
    bool active_ = false;
};

/// Pointwise lift of a (batch x positions) input to `width` channels.
class Lift {
public:
    Lift() = default;
    explicit Lift(std::size_t width);
    void init(Rng& rng);
    Cube forward(const Matrix& x);
    void backward(const Cube& gh);  // input gradient is not needed
    void visit(const std::string& prefix, bool trainable, const TensorVisitor& v);

    std::size_t width = 0;
    std::vector<double> W, b, gW, gb;
    bool frozen = false;

private:
    Matrix x_cache_;
};

/// Per-channel batch normalization over a (batch, channels, positions) cube.
class ChannelNorm {
public:
    ChannelNorm() = default;
    explicit ChannelNorm(std::size_t channels);
    Cube forward(const Cube& x, bool train);
    Cube backward(const Cube& gy);
    void visit(const std::string& prefix, const TensorVisitor& v);

    std::size_t channels = 0;
    std::vector<double> gamma, beta, running_mean, running_var, ggamma, gbeta;
    double momentum = 0.1, eps = 1e-5;

private:
    Cube xhat_;
    std::vector<double> invstd_;
};

/// Spectral convolution along the position axis: DFT, mode-wise complex
/// channel mixing on the lowest retained modes, inverse DFT, plus a local
/// pointwise channel map.
class SpectralConv {
public:
    SpectralConv() = default;
    SpectralConv(std::size_t width, int positions, int modes);
    void init(Rng& rng);
    Cube forward(const Cube& h);
    Cube backward(const Cube& gy);
    void visit(const std::string& prefix, bool trainable, const TensorVisitor& v);

    std::size_t width = 0;
    int positions = 0;
    int modes_kept = 0;  ///< min(requested modes, dft bins)
    // R: complex (in, out, mode); W: local map (out, in)
    std::vector<double> Rre, Rim, Wl, bl, gRre, gRim, gWl, gbl;

private:
    RealDft dft_;
    Cube h_cache_;
    std::vector<double> spec_re_, spec_im_;  // cached rfft of input

    std::size_t ridx(std::size_t ci, std::size_t co, int k) const {
        return (ci * width + co) * modes_kept + k;
    }
};

/// ReLU over cubes.
class CubeReLU {
public:
    Cube forward(const Cube& x);
    Cube backward(const Cube& gy);
    double last_margin() const { return margin_; }

private:
    Cube mask_;
    double margin_ = 0.0;
};

// ---------------------------------------------------------------------------
// per-variable subnetworks

/// One scalar-output network per physical variable.
class SubNetwork {
public:
    virtual ~SubNetwork() = default;
    virtual Matrix forward(const Matrix& features, bool train) = 0;
    virtual void backward(const Matrix& gy) = 0;
    virtual void visit_tensors(const std::string& prefix, const TensorVisitor& v) = 0;
    virtual void set_first_layer_frozen(bool frozen) = 0;
    virtual std::unique_ptr<SubNetwork> clone() const = 0;
    virtual std::size_t input_dim() const = 0;
    /// Distance of the closest activation to a ReLU kink in the last
    /// forward pass; useful for picking smooth points in derivative checks.
    virtual double activation_margin() const = 0;
};

struct DenseShape {
    std::size_t input = 15;
    std::size_t width = 398;
    double dropout = 0.2;
};

/// Five linear maps (input + three hidden + output) with batch norm after
/// each non-output map and dropout after the last hidden activation.
class DenseNet final : public SubNetwork {
public:
    DenseNet(const DenseShape& shape, Rng& rng, Rng* dropout_rng);
    Matrix forward(const Matrix& features, bool train) override;
    void backward(const Matrix& gy) override;
    void visit_tensors(const std::string& prefix, const TensorVisitor& v) override;
    void set_first_layer_frozen(bool frozen) override;
    std::unique_ptr<SubNetwork> clone() const override;
    std::size_t input_dim() const override { return shape_.input; }
    double activation_margin() const override;

private:
    DenseShape shape_;
    Linear l1_, l2_, l3_, l4_, l5_;
    BatchNorm bn1_, bn2_, bn3_, bn4_;
    ReLU r1_, r2_, r3_, r4_;
    Dropout drop_;
    Rng* dropout_rng_ = nullptr;
};

struct SpectralShape {
    std::size_t input = 15;
    std::size_t width = 64;
    int modes = 12;
    int layers = 3;
    double dropout = 0.2;
};

/// Lift to `width` channels, three spectral blocks with ReLU and channel
/// batch norm, then flatten, batch norm, dropout and a linear projection.
class SpectralNet final : public SubNetwork {
public:
    SpectralNet(const SpectralShape& shape, Rng& rng, Rng* dropout_rng);
    Matrix forward(const Matrix& features, bool train) override;
    void backward(const Matrix& gy) override;
    void visit_tensors(const std::string& prefix, const TensorVisitor& v) override;
    void set_first_layer_frozen(bool frozen) override;
    std::unique_ptr<SubNetwork> clone() const override;
    std::size_t input_dim() const override { return shape_.input; }
    double activation_margin() const override;

    const SpectralShape& shape() const { return shape_; }

private:
    SpectralShape shape_;
    Lift lift_;
    ChannelNorm bn_lift_;
    std::vector<SpectralConv> convs_;
    std::vector<CubeReLU> relus_;
    std::vector<ChannelNorm> norms_;
    BatchNorm bn_flat_;
    Dropout drop_;
    Linear proj_;
    Rng* dropout_rng_ = nullptr;
    std::size_t batch_cache_ = 0;
};

// ---------------------------------------------------------------------------
// optimizer

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments;
};

/// One Adam update over every trainable tensor; frozen tensors are left
/// untouched (their moments are not advanced either).
void adam_step(AdamState& opt, const std::vector<TensorRef>& tensors);

/// Collects tensor refs from a subnetwork under `prefix`.
std::vector<TensorRef> collect_tensors(SubNetwork& net, const std::string& prefix);

}  // namespace hybridfv
