#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsrk/array2d.hpp"

namespace bsrk::sr {

/// Channel-major dense tensor (C, H, W).
struct Tensor3 {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(int c_, int h_, int w_, double fill = 0.0)
        : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, fill) {}

    double& at(int ch, int r, int col) {
        return v[(static_cast<std::size_t>(ch) * h + r) * w + col];
    }
    double at(int ch, int r, int col) const {
        return v[(static_cast<std::size_t>(ch) * h + r) * w + col];
    }
    std::size_t size() const { return v.size(); }
};

/// 3x3 same-padding convolution layer (zero padding).
struct ConvLayer {
    int in_c = 0, out_c = 0;
    std::vector<double> weights; // [out][in][3][3]
    std::vector<double> bias;    // [out]

    std::size_t weight_count() const { return weights.size() + bias.size(); }
    double& weight(int o, int i, int kr, int kc) {
        return weights[((static_cast<std::size_t>(o) * in_c + i) * 3 + kr) * 3 + kc];
    }
    double weight(int o, int i, int kr, int kc) const {
        return weights[((static_cast<std::size_t>(o) * in_c + i) * 3 + kr) * 3 + kc];
    }
};

/// Residual super-resolution network: bicubic skip on channel 0 plus a
/// three-layer conv branch whose final alpha^2 feature maps are pixel-
/// rearranged to the upscaled resolution. The final layer starts at zero,
/// so an untrained model reproduces the bicubic baseline.
class ConvModel {
public:
    static constexpr int kHiddenFeatures = 16;

    ConvModel() = default;
    ConvModel(int channels, int alpha, std::uint64_t init_seed);

    int channels() const { return channels_; }
    int alpha() const { return alpha_; }
    std::uint64_t init_seed() const { return init_seed_; }

    /// Forward pass; input (C, H, W) -> output (1, aH, aW), unclamped.
    Array2D forward(const Tensor3& input) const;

    /// Forward pass retaining intermediate activations for backprop.
    struct Workspace {
        Tensor3 input;
        Tensor3 z1, a1; // conv1 pre/post activation
        Tensor3 z2, a2;
        Tensor3 z3;     // alpha^2 maps at LR resolution
        Array2D skip;
        Array2D output;
    };
    void forward(const Tensor3& input, Workspace& ws) const;

    /// Backprop of dLoss/dOutput through the residual branch, accumulating
    /// parameter gradients into grad (same flat layout as parameters()).
    void backward(const Workspace& ws, const Array2D& d_output,
                  std::vector<double>& grad) const;

    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& p);

    const ConvLayer& layer(int i) const;
    std::size_t layer_offset(int i) const; // offset into the flat vector

    void save(const std::string& path) const;
    static ConvModel load(const std::string& path);

private:
    int channels_ = 1;
    int alpha_ = 2;
    std::uint64_t init_seed_ = 0;
    ConvLayer l1_, l2_, l3_;
};

/// Leaky rectifier used between conv layers.
inline double activate(double x) { return x > 0.0 ? x : 0.01 * x; }
inline double activate_grad(double x) { return x > 0.0 ? 1.0 : 0.01; }

} // namespace bsrk::sr
