#include "sepl/network.hpp"

#include "sepl/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace sepl {

Tensor to_tensor(const Raster& r) {
    Tensor t(r.channels(), r.height(), r.width());
    for (int c = 0; c < r.channels(); ++c)
        for (int y = 0; y < r.height(); ++y)
            for (int x = 0; x < r.width(); ++x) t.at(c, y, x) = r.at(x, y, c);
    return t;
}

Raster to_raster(const Tensor& t) {
    Raster r(t.width, t.height, t.channels);
    for (int c = 0; c < t.channels; ++c)
        for (int y = 0; y < t.height; ++y)
            for (int x = 0; x < t.width; ++x) r.at(x, y, c) = t.at(c, y, x);
    return r;
}

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::Relu: return "relu";
        case LayerKind::Downsample2: return "downsample2";
        case LayerKind::Upsample2: return "upsample2";
        case LayerKind::SkipAdd: return "skip_add";
        case LayerKind::MultiscaleConv: return "multiscale_conv";
    }
    return "unknown";
}

LayerSpec LayerSpec::conv(int kernel, int out_channels, int stride, int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.kernel = kernel;
    s.out_channels = out_channels;
    s.stride = stride;
    s.pad = pad;
    return s;
}
LayerSpec LayerSpec::relu() { return {}; }
LayerSpec LayerSpec::downsample2() {
    LayerSpec s;
    s.kind = LayerKind::Downsample2;
    return s;
}
LayerSpec LayerSpec::upsample2() {
    LayerSpec s;
    s.kind = LayerKind::Upsample2;
    return s;
}
LayerSpec LayerSpec::skip_add(int from_layer) {
    LayerSpec s;
    s.kind = LayerKind::SkipAdd;
    s.skip_from = from_layer;
    return s;
}
LayerSpec LayerSpec::multiscale_conv(int k_narrow, int k_wide, int out_channels) {
    LayerSpec s;
    s.kind = LayerKind::MultiscaleConv;
    s.kernel = k_narrow;
    s.kernel_wide = k_wide;
    s.out_channels = out_channels;
    return s;
}

template <typename T>
std::size_t BasicLayer<T>::expected_param_count() const {
    switch (kind) {
        case LayerKind::Conv: return narrow_weight_count() + static_cast<std::size_t>(out_channels);
        case LayerKind::MultiscaleConv:
            return narrow_weight_count() + wide_weight_count() +
                   static_cast<std::size_t>(out_channels);
        default: return 0;
    }
}

template <typename T>
std::size_t BasicNetwork<T>::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.params.size();
    return n;
}

namespace {

Error layer_error(std::size_t index, const std::string& what) {
    return Error("layer " + std::to_string(index) + ": " + what);
}

std::string shape_str(const Shape& s) {
    return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" +
           std::to_string(s.width);
}

}  // namespace

template <typename T>
std::vector<Shape> layer_shapes(const BasicNetwork<T>& net) {
    std::vector<Shape> shapes;
    shapes.reserve(net.layers.size());
    Shape cur{net.input_channels, net.input_height, net.input_width};
    if (cur.channels <= 0 || cur.height <= 0 || cur.width <= 0) {
        throw Error("network input shape must be positive");
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        switch (l.kind) {
            case LayerKind::Conv:
            case LayerKind::MultiscaleConv: {
                if (l.in_channels != cur.channels) {
                    throw layer_error(i, "expects " + std::to_string(l.in_channels) +
                                             " input channels, got " + shape_str(cur));
                }
                if (l.kernel <= 0 || l.kernel % 2 == 0 ||
                    (l.kind == LayerKind::MultiscaleConv &&
                     (l.kernel_wide <= 0 || l.kernel_wide % 2 == 0))) {
                    throw layer_error(i, "convolution kernels must be odd");
                }
                if (l.out_channels <= 0 || l.stride <= 0 || l.pad < 0) {
                    throw layer_error(i, "invalid convolution geometry");
                }
                if (l.params.size() != l.expected_param_count()) {
                    throw layer_error(i, "parameter count mismatch");
                }
                const int oh = (cur.height + 2 * l.pad - l.kernel) / l.stride + 1;
                const int ow = (cur.width + 2 * l.pad - l.kernel) / l.stride + 1;
                if (oh <= 0 || ow <= 0) throw layer_error(i, "kernel larger than input");
                if (l.kind == LayerKind::MultiscaleConv &&
                    (l.stride != 1 || l.pad != l.kernel / 2)) {
                    throw layer_error(i, "multiscale conv must be same-padded with stride 1");
                }
                cur = {l.out_channels, oh, ow};
                break;
            }
            case LayerKind::Relu: break;
            case LayerKind::Downsample2:
                if (cur.height < 2 || cur.width < 2) throw layer_error(i, "input too small to pool");
                cur = {cur.channels, cur.height / 2, cur.width / 2};
                break;
            case LayerKind::Upsample2: cur = {cur.channels, cur.height * 2, cur.width * 2}; break;
            case LayerKind::SkipAdd:
                if (l.skip_from < 0 || static_cast<std::size_t>(l.skip_from) >= i) {
                    throw layer_error(i, "skip source must be an earlier layer");
                }
                if (shapes[static_cast<std::size_t>(l.skip_from)] != cur) {
                    throw layer_error(i, "skip source shape " +
                                             shape_str(shapes[static_cast<std::size_t>(l.skip_from)]) +
                                             " does not match " + shape_str(cur));
                }
                break;
            default: throw layer_error(i, "unknown layer kind");
        }
        if (l.kind != LayerKind::Conv && l.kind != LayerKind::MultiscaleConv && !l.params.empty()) {
            throw layer_error(i, "parameter-free layer carries weights");
        }
        shapes.push_back(cur);
    }
    if (shapes.empty()) throw Error("network has no layers");
    const Shape want{1, net.input_height, net.input_width};
    if (shapes.back() != want) {
        throw layer_error(shapes.size() - 1, "network output " + shape_str(shapes.back()) +
                                                 " must be " + shape_str(want));
    }
    return shapes;
}

Network build_network(int input_channels, int input_height, int input_width,
                      const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    Network net;
    net.input_channels = input_channels;
    net.input_height = input_height;
    net.input_width = input_width;
    std::mt19937_64 rng(seed);
    int channels = input_channels;
    for (const auto& s : specs) {
        Layer l;
        l.kind = s.kind;
        l.skip_from = s.skip_from;
        if (s.kind == LayerKind::Conv || s.kind == LayerKind::MultiscaleConv) {
            l.kernel = s.kernel;
            l.kernel_wide = s.kind == LayerKind::MultiscaleConv ? s.kernel_wide : 0;
            l.in_channels = channels;
            l.out_channels = s.out_channels;
            l.stride = s.kind == LayerKind::Conv ? s.stride : 1;
            l.pad = s.pad >= 0 && s.kind == LayerKind::Conv ? s.pad : s.kernel / 2;
            l.params.assign(l.expected_param_count(), 0.0f);
            const std::size_t nw = l.params.size() - static_cast<std::size_t>(l.out_channels);
            const double fan_in = static_cast<double>(nw) / l.out_channels;
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            const double bound = std::sqrt(6.0 / fan_in);
            for (std::size_t k = 0; k < nw; ++k) l.params[k] = static_cast<float>(bound * u(rng));
            channels = s.out_channels;
        }
        net.layers.push_back(std::move(l));
    }
    layer_shapes(net);
    return net;
}

std::vector<LayerSpec> default_architecture() {
    return {
        LayerSpec::conv(3, 16),                  // 0
        LayerSpec::relu(),                       // 1
        LayerSpec::downsample2(),                // 2
        LayerSpec::multiscale_conv(3, 7, 32),    // 3
        LayerSpec::relu(),                       // 4
        LayerSpec::downsample2(),                // 5
        LayerSpec::conv(3, 32),                  // 6
        LayerSpec::relu(),                       // 7
        LayerSpec::upsample2(),                  // 8
        LayerSpec::conv(3, 16),                  // 9
        LayerSpec::relu(),                       // 10
        LayerSpec::skip_add(2),                  // 11
        LayerSpec::upsample2(),                  // 12
        LayerSpec::conv(3, 1),                   // 13
    };
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConvGeom {
    int in_c, in_h, in_w, k, stride, pad, out_h, out_w;
    int rows() const { return in_c * k * k; }
    int cols() const { return out_h * out_w; }
};

ConvGeom geometry(int in_c, int in_h, int in_w, int k, int stride, int pad) {
    return {in_c, in_h, in_w, k, stride, pad, (in_h + 2 * pad - k) / stride + 1,
            (in_w + 2 * pad - k) / stride + 1};
}

template <typename T>
void im2col(const T* x, const ConvGeom& g, std::vector<T>& cols) {
    const int ncols = g.cols();
    cols.assign(static_cast<std::size_t>(g.rows()) * ncols, T(0));
    for (int c = 0; c < g.in_c; ++c) {
        const T* xc = x + static_cast<std::size_t>(c) * g.in_h * g.in_w;
        for (int ky = 0; ky < g.k; ++ky) {
            for (int kx = 0; kx < g.k; ++kx) {
                T* dst = cols.data() + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * ncols;
                for (int oy = 0; oy < g.out_h; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.in_h) continue;
                    const T* src = xc + static_cast<std::size_t>(iy) * g.in_w;
                    T* drow = dst + static_cast<std::size_t>(oy) * g.out_w;
                    for (int ox = 0; ox < g.out_w; ++ox) {
                        const int ix = ox * g.stride - g.pad + kx;
                        if (ix >= 0 && ix < g.in_w) drow[ox] = src[ix];
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeom& g, T* dx) {
    const int ncols = g.cols();
    for (int c = 0; c < g.in_c; ++c) {
        T* xc = dx + static_cast<std::size_t>(c) * g.in_h * g.in_w;
        for (int ky = 0; ky < g.k; ++ky) {
            for (int kx = 0; kx < g.k; ++kx) {
                const T* src =
                    cols + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * ncols;
                for (int oy = 0; oy < g.out_h; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.in_h) continue;
                    T* drow = xc + static_cast<std::size_t>(iy) * g.in_w;
                    const T* srow = src + static_cast<std::size_t>(oy) * g.out_w;
                    for (int ox = 0; ox < g.out_w; ++ox) {
                        const int ix = ox * g.stride - g.pad + kx;
                        if (ix >= 0 && ix < g.in_w) drow[ix] += srow[ox];
                    }
                }
            }
        }
    }
}

// out += W * im2col(x)
template <typename T>
void conv_accumulate(const BasicTensor<T>& x, const T* w, int k, int out_c, int stride, int pad,
                     BasicTensor<T>& out, std::vector<T>& scratch) {
    const ConvGeom g = geometry(x.channels, x.height, x.width, k, stride, pad);
    im2col(x.data.data(), g, scratch);
    Eigen::Map<const RowMat<T>> wm(w, out_c, g.rows());
    Eigen::Map<const RowMat<T>> cm(scratch.data(), g.rows(), g.cols());
    Eigen::Map<RowMat<T>> om(out.data.data(), out_c, g.cols());
    om.noalias() += wm * cm;
}

// dW = dOut * cols^T ; dx += col2im(W^T * dOut)
template <typename T>
void conv_backward(const BasicTensor<T>& x, const T* w, int k, int out_c, int stride, int pad,
                   const BasicTensor<T>& dout, T* dw, BasicTensor<T>* dx,
                   std::vector<T>& scratch) {
    const ConvGeom g = geometry(x.channels, x.height, x.width, k, stride, pad);
    im2col(x.data.data(), g, scratch);
    Eigen::Map<const RowMat<T>> cm(scratch.data(), g.rows(), g.cols());
    Eigen::Map<const RowMat<T>> dm(dout.data.data(), out_c, g.cols());
    Eigen::Map<RowMat<T>> dwm(dw, out_c, g.rows());
    dwm.noalias() = dm * cm.transpose();
    if (dx != nullptr) {
        Eigen::Map<const RowMat<T>> wm(w, out_c, g.rows());
        RowMat<T> dcols = wm.transpose() * dm;
        col2im_add(dcols.data(), g, dx->data.data());
    }
}

template <typename T>
void add_bias(BasicTensor<T>& out, const T* bias) {
    const std::size_t plane = out.plane();
    for (int c = 0; c < out.channels; ++c) {
        T* p = out.data.data() + c * plane;
        const T b = bias[c];
        for (std::size_t i = 0; i < plane; ++i) p[i] += b;
    }
}

template <typename T>
BasicTensor<T> run_layer(const BasicLayer<T>& l, const BasicTensor<T>& x, const Shape& s,
                         const std::vector<BasicTensor<T>>& outputs, std::vector<T>& scratch) {
    switch (l.kind) {
        case LayerKind::Conv: {
            BasicTensor<T> out(s.channels, s.height, s.width);
            conv_accumulate(x, l.params.data(), l.kernel, l.out_channels, l.stride, l.pad, out,
                            scratch);
            add_bias(out, l.params.data() + l.narrow_weight_count());
            return out;
        }
        case LayerKind::MultiscaleConv: {
            BasicTensor<T> out(s.channels, s.height, s.width);
            conv_accumulate(x, l.params.data(), l.kernel, l.out_channels, 1, l.kernel / 2, out,
                            scratch);
            conv_accumulate(x, l.params.data() + l.narrow_weight_count(), l.kernel_wide,
                            l.out_channels, 1, l.kernel_wide / 2, out, scratch);
            add_bias(out, l.params.data() + l.narrow_weight_count() + l.wide_weight_count());
            return out;
        }
        case LayerKind::Relu: {
            BasicTensor<T> out = x;
            for (T& v : out.data) v = v > T(0) ? v : T(0);
            return out;
        }
        case LayerKind::Downsample2: {
            BasicTensor<T> out(s.channels, s.height, s.width);
            for (int c = 0; c < s.channels; ++c)
                for (int y = 0; y < s.height; ++y)
                    for (int xx = 0; xx < s.width; ++xx) {
                        T m = x.at(c, 2 * y, 2 * xx);
                        m = std::max(m, x.at(c, 2 * y, 2 * xx + 1));
                        m = std::max(m, x.at(c, 2 * y + 1, 2 * xx));
                        m = std::max(m, x.at(c, 2 * y + 1, 2 * xx + 1));
                        out.at(c, y, xx) = m;
                    }
            return out;
        }
        case LayerKind::Upsample2: {
            BasicTensor<T> out(s.channels, s.height, s.width);
            for (int c = 0; c < s.channels; ++c)
                for (int y = 0; y < s.height; ++y)
                    for (int xx = 0; xx < s.width; ++xx) out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
            return out;
        }
        case LayerKind::SkipAdd: {
            BasicTensor<T> out = x;
            const auto& src = outputs[static_cast<std::size_t>(l.skip_from)];
            for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += src.data[i];
            return out;
        }
    }
    throw Error("unknown layer kind");
}

template <typename T>
void check_input(const BasicNetwork<T>& net, const BasicTensor<T>& input) {
    if (input.channels != net.input_channels || input.height != net.input_height ||
        input.width != net.input_width) {
        throw Error("layer 0: input " + shape_str({input.channels, input.height, input.width}) +
                    " does not match network input " +
                    shape_str({net.input_channels, net.input_height, net.input_width}));
    }
}

}  // namespace

template <typename T>
std::vector<BasicTensor<T>> forward_trace(const BasicNetwork<T>& net,
                                          const BasicTensor<T>& input) {
    const auto shapes = layer_shapes(net);
    check_input(net, input);
    std::vector<BasicTensor<T>> outputs;
    outputs.reserve(net.layers.size());
    std::vector<T> scratch;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const BasicTensor<T>& x = i == 0 ? input : outputs[i - 1];
        outputs.push_back(run_layer(net.layers[i], x, shapes[i], outputs, scratch));
    }
    return outputs;
}

template <typename T>
BasicTensor<T> forward(const BasicNetwork<T>& net, const BasicTensor<T>& input) {
    auto outputs = forward_trace(net, input);
    return std::move(outputs.back());
}

template <typename T>
double loss(const BasicTensor<T>& prediction, const BasicTensor<T>& target) {
    if (!prediction.same_shape(target)) throw Error("loss: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < prediction.data.size(); ++i) {
        const double d = static_cast<double>(target.data[i]) - static_cast<double>(prediction.data[i]);
        sum += d * d;
    }
    return sum;
}

template <typename T>
Gradients backward(const BasicNetwork<T>& net, const BasicTensor<T>& input,
                   const BasicTensor<T>& target) {
    const auto outputs = forward_trace(net, input);
    const auto& pred = outputs.back();
    if (!pred.same_shape(target)) throw Error("backward: target shape mismatch");

    Gradients grads;
    grads.loss = loss(pred, target);
    grads.layers.resize(net.layers.size());

    const std::size_t n = net.layers.size();
    std::vector<BasicTensor<T>> d;
    d.reserve(n);
    for (const auto& o : outputs) d.emplace_back(o.channels, o.height, o.width);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        d.back().data[i] = T(2) * (pred.data[i] - target.data[i]);
    }

    std::vector<T> scratch;
    std::vector<T> pgrad;
    for (std::size_t ii = n; ii-- > 0;) {
        const auto& l = net.layers[ii];
        const BasicTensor<T>& x = ii == 0 ? input : outputs[ii - 1];
        BasicTensor<T>* dx = ii == 0 ? nullptr : &d[ii - 1];
        const BasicTensor<T>& dy = d[ii];
        switch (l.kind) {
            case LayerKind::Conv:
            case LayerKind::MultiscaleConv: {
                pgrad.assign(l.params.size(), T(0));
                const std::size_t nn = l.narrow_weight_count();
                const int pad = l.kind == LayerKind::Conv ? l.pad : l.kernel / 2;
                const int stride = l.kind == LayerKind::Conv ? l.stride : 1;
                conv_backward(x, l.params.data(), l.kernel, l.out_channels, stride, pad, dy,
                              pgrad.data(), dx, scratch);
                std::size_t bias_at = nn;
                if (l.kind == LayerKind::MultiscaleConv) {
                    conv_backward(x, l.params.data() + nn, l.kernel_wide, l.out_channels, 1,
                                  l.kernel_wide / 2, dy, pgrad.data() + nn, dx, scratch);
                    bias_at += l.wide_weight_count();
                }
                const std::size_t plane = dy.plane();
                auto& g = grads.layers[ii];
                g.assign(pgrad.begin(), pgrad.end());
                for (int c = 0; c < l.out_channels; ++c) {
                    double s = 0.0;
                    const T* p = dy.data.data() + c * plane;
                    for (std::size_t k = 0; k < plane; ++k) s += static_cast<double>(p[k]);
                    g[bias_at + static_cast<std::size_t>(c)] = s;
                }
                break;
            }
            case LayerKind::Relu:
                if (dx != nullptr)
                    for (std::size_t k = 0; k < x.data.size(); ++k)
                        if (x.data[k] > T(0)) dx->data[k] += dy.data[k];
                break;
            case LayerKind::Downsample2:
                if (dx != nullptr) {
                    for (int c = 0; c < dy.channels; ++c)
                        for (int y = 0; y < dy.height; ++y)
                            for (int xx = 0; xx < dy.width; ++xx) {
                                int by = 2 * y, bx = 2 * xx;
                                T m = x.at(c, by, bx);
                                for (int q = 1; q < 4; ++q) {
                                    const int yy = 2 * y + q / 2, xq = 2 * xx + q % 2;
                                    if (x.at(c, yy, xq) > m) {
                                        m = x.at(c, yy, xq);
                                        by = yy;
                                        bx = xq;
                                    }
                                }
                                dx->at(c, by, bx) += dy.at(c, y, xx);
                            }
                }
                break;
            case LayerKind::Upsample2:
                if (dx != nullptr)
                    for (int c = 0; c < dy.channels; ++c)
                        for (int y = 0; y < dy.height; ++y)
                            for (int xx = 0; xx < dy.width; ++xx)
                                dx->at(c, y / 2, xx / 2) += dy.at(c, y, xx);
                break;
            case LayerKind::SkipAdd: {
                auto& src = d[static_cast<std::size_t>(l.skip_from)];
                for (std::size_t k = 0; k < dy.data.size(); ++k) src.data[k] += dy.data[k];
                if (dx != nullptr)
                    for (std::size_t k = 0; k < dy.data.size(); ++k) dx->data[k] += dy.data[k];
                break;
            }
        }
    }
    return grads;
}

template struct BasicLayer<float>;
template struct BasicLayer<double>;
template struct BasicNetwork<float>;
template struct BasicNetwork<double>;
template std::vector<Shape> layer_shapes(const BasicNetwork<float>&);
template std::vector<Shape> layer_shapes(const BasicNetwork<double>&);
template BasicTensor<float> forward(const BasicNetwork<float>&, const BasicTensor<float>&);
template BasicTensor<double> forward(const BasicNetwork<double>&, const BasicTensor<double>&);
template std::vector<BasicTensor<float>> forward_trace(const BasicNetwork<float>&,
                                                       const BasicTensor<float>&);
template std::vector<BasicTensor<double>> forward_trace(const BasicNetwork<double>&,
                                                        const BasicTensor<double>&);
template double loss(const BasicTensor<float>&, const BasicTensor<float>&);
template double loss(const BasicTensor<double>&, const BasicTensor<double>&);
template Gradients backward(const BasicNetwork<float>&, const BasicTensor<float>&,
                            const BasicTensor<float>&);
template Gradients backward(const BasicNetwork<double>&, const BasicTensor<double>&,
                            const BasicTensor<double>&);

}  // namespace sepl
