#pragma once

#include "sepl/raster.hpp"

#include <cstddef>
#include <vector>

namespace sepl {

/// Channel-major (C, H, W) dense tensor.
template <typename T>
struct BasicTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<T> data;

    BasicTensor() = default;
    BasicTensor(int c, int h, int w, T fill = T(0))
        : channels(c), height(h), width(w),
          data(static_cast<std::size_t>(c) * h * w, fill) {}

    std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
    T& at(int c, int y, int x) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
    T at(int c, int y, int x) const {
        return data[c * plane() + static_cast<std::size_t>(y) * width + x];
    }
    bool same_shape(const BasicTensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }

    template <typename U>
    BasicTensor<U> cast() const {
        BasicTensor<U> out(channels, height, width);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;
};

using Tensor = BasicTensor<float>;

/// Converts an interleaved raster into a channel-major tensor.
Tensor to_tensor(const Raster& r);
/// Converts a channel-major tensor back into an interleaved raster.
Raster to_raster(const Tensor& t);

}  // namespace sepl
