#pragma once

// A small fully convolutional encoder-decoder regressing a likelihood map
// at input resolution, trained on the summed squared error
//     E = sum_x (r(x) - p(x))^2.
//
// Networks are templated on the scalar type: weights are stored as f32 for
// training and inference; f64 copies exist for gradient verification.

#include "sepl/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sepl {

enum class LayerKind : std::uint8_t {
    Conv = 1,
    Relu = 2,
    Downsample2 = 3,     // 2x2 max pooling, stride 2
    Upsample2 = 4,       // nearest neighbour x2
    SkipAdd = 5,         // adds the output of an earlier layer
    MultiscaleConv = 6,  // two parallel same-padded convolutions, summed
};

const char* to_string(LayerKind k);

/// Architecture description of one layer without weights.
struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    int kernel = 0;       // conv kernel, or the narrow kernel of a multiscale conv
    int kernel_wide = 0;  // multiscale conv only
    int out_channels = 0;
    int stride = 1;
    int pad = -1;         // -1 selects kernel / 2
    int skip_from = -1;   // SkipAdd only: index of the layer whose output is added

    static LayerSpec conv(int kernel, int out_channels, int stride = 1, int pad = -1);
    static LayerSpec relu();
    static LayerSpec downsample2();
    static LayerSpec upsample2();
    static LayerSpec skip_add(int from_layer);
    static LayerSpec multiscale_conv(int k_narrow, int k_wide, int out_channels);
};

template <typename T>
struct BasicLayer {
    LayerKind kind = LayerKind::Relu;
    int kernel = 0;
    int kernel_wide = 0;
    int in_channels = 0;
    int out_channels = 0;
    int stride = 1;
    int pad = 0;
    int skip_from = -1;
    /// Conv: W[out][in][k][k] then bias[out].
    /// MultiscaleConv: narrow W, then wide W, then one shared bias[out].
    std::vector<T> params;

    std::size_t narrow_weight_count() const {
        return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
    }
    std::size_t wide_weight_count() const {
        return static_cast<std::size_t>(out_channels) * in_channels * kernel_wide * kernel_wide;
    }
    /// Number of parameters implied by the layer shape.
    std::size_t expected_param_count() const;

    friend bool operator==(const BasicLayer&, const BasicLayer&) = default;
};

struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;
    friend bool operator==(const Shape&, const Shape&) = default;
};

template <typename T>
struct BasicNetwork {
    int input_channels = 0;
    int input_height = 0;
    int input_width = 0;
    std::vector<BasicLayer<T>> layers;

    std::size_t param_count() const;

    template <typename U>
    BasicNetwork<U> cast() const {
        BasicNetwork<U> out;
        out.input_channels = input_channels;
        out.input_height = input_height;
        out.input_width = input_width;
        for (const auto& l : layers) {
            BasicLayer<U> c;
            c.kind = l.kind;
            c.kernel = l.kernel;
            c.kernel_wide = l.kernel_wide;
            c.in_channels = l.in_channels;
            c.out_channels = l.out_channels;
            c.stride = l.stride;
            c.pad = l.pad;
            c.skip_from = l.skip_from;
            c.params.assign(l.params.begin(), l.params.end());
            out.layers.push_back(std::move(c));
        }
        return out;
    }

    friend bool operator==(const BasicNetwork&, const BasicNetwork&) = default;
};

using Network = BasicNetwork<float>;
using Layer = BasicLayer<float>;

/// Output shape of every layer. Throws Error naming the offending layer index
/// when shapes do not compose, a conv kernel is even, a skip source does not
/// match, or the network does not end in one channel at input resolution.
template <typename T>
std::vector<Shape> layer_shapes(const BasicNetwork<T>& net);

/// Builds a network with He-uniform initial weights (zero biases) drawn from a
/// generator seeded with `seed`.
Network build_network(int input_channels, int input_height, int input_width,
                      const std::vector<LayerSpec>& specs, std::uint64_t seed);

/// Default encoder-decoder:
///   conv3(16) relu down2 multiscale(3,7)(32) relu down2 conv3(32) relu
///   up2 conv3(16) relu skip_add(layer 2) up2 conv3(1)
std::vector<LayerSpec> default_architecture();

template <typename T>
BasicTensor<T> forward(const BasicNetwork<T>& net, const BasicTensor<T>& input);

/// Output of every layer, in layer order.
template <typename T>
std::vector<BasicTensor<T>> forward_trace(const BasicNetwork<T>& net,
                                          const BasicTensor<T>& input);

/// Sum of squared differences, accumulated in double.
template <typename T>
double loss(const BasicTensor<T>& prediction, const BasicTensor<T>& target);

/// dE/dw for every layer's parameters (same layout as BasicLayer::params).
struct Gradients {
    double loss = 0.0;
    std::vector<std::vector<double>> layers;
};

template <typename T>
Gradients backward(const BasicNetwork<T>& net, const BasicTensor<T>& input,
                   const BasicTensor<T>& target);

}  // namespace sepl
