#include "sepl/weights_io.hpp"

#include "sepl/error.hpp"
#include "sepl/le_bytes.hpp"
#include "sepl/raster_io.hpp"

#include <string>

namespace sepl {

std::vector<std::uint8_t> encode_weights(const Network& net) {
    layer_shapes(net);
    ByteWriter w;
    w.put_magic("SEPN");
    w.put_u32(kWeightsVersion);
    w.put_u32(static_cast<std::uint32_t>(net.layers.size()));
    w.put_u32(static_cast<std::uint32_t>(net.input_channels));
    w.put_u32(static_cast<std::uint32_t>(net.input_height));
    w.put_u32(static_cast<std::uint32_t>(net.input_width));
    for (const auto& l : net.layers) {
        w.put_u8(static_cast<std::uint8_t>(l.kind));
        switch (l.kind) {
            case LayerKind::Conv:
                w.put_u32(static_cast<std::uint32_t>(l.kernel));
                w.put_u32(static_cast<std::uint32_t>(l.in_channels));
                w.put_u32(static_cast<std::uint32_t>(l.out_channels));
                w.put_u32(static_cast<std::uint32_t>(l.stride));
                w.put_u32(static_cast<std::uint32_t>(l.pad));
                break;
            case LayerKind::MultiscaleConv:
                w.put_u32(static_cast<std::uint32_t>(l.kernel));
                w.put_u32(static_cast<std::uint32_t>(l.kernel_wide));
                w.put_u32(static_cast<std::uint32_t>(l.in_channels));
                w.put_u32(static_cast<std::uint32_t>(l.out_channels));
                break;
            case LayerKind::SkipAdd: w.put_u32(static_cast<std::uint32_t>(l.skip_from)); break;
            default: break;
        }
        for (float v : l.params) w.put_f32(v);
    }
    return std::move(w).bytes();
}

Network decode_weights(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("SEPN");
    const std::uint32_t version = r.get_u32();
    if (version != kWeightsVersion) {
        throw FormatError("unsupported SEPN version " + std::to_string(version));
    }
    const std::uint32_t count = r.get_u32();
    Network net;
    net.input_channels = static_cast<int>(r.get_u32());
    net.input_height = static_cast<int>(r.get_u32());
    net.input_width = static_cast<int>(r.get_u32());
    for (std::uint32_t i = 0; i < count; ++i) {
        Layer l;
        const std::uint8_t tag = r.get_u8();
        if (tag < 1 || tag > 6) throw FormatError("unknown layer tag " + std::to_string(tag));
        l.kind = static_cast<LayerKind>(tag);
        switch (l.kind) {
            case LayerKind::Conv:
                l.kernel = static_cast<int>(r.get_u32());
                l.in_channels = static_cast<int>(r.get_u32());
                l.out_channels = static_cast<int>(r.get_u32());
                l.stride = static_cast<int>(r.get_u32());
                l.pad = static_cast<int>(r.get_u32());
                break;
            case LayerKind::MultiscaleConv:
                l.kernel = static_cast<int>(r.get_u32());
                l.kernel_wide = static_cast<int>(r.get_u32());
                l.in_channels = static_cast<int>(r.get_u32());
                l.out_channels = static_cast<int>(r.get_u32());
                l.pad = l.kernel / 2;
                break;
            case LayerKind::SkipAdd: l.skip_from = static_cast<int>(r.get_u32()); break;
            default: break;
        }
        const std::size_t n = l.expected_param_count();
        if (r.remaining() < n * 4) throw FormatError("truncated SEPN weights");
        l.params.resize(n);
        for (auto& v : l.params) v = r.get_f32();
        net.layers.push_back(std::move(l));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in SEPN file");
    try {
        layer_shapes(net);
    } catch (const Error& e) {
        throw FormatError(std::string("inconsistent SEPN network: ") + e.what());
    }
    return net;
}

void save_weights(const std::filesystem::path& path, const Network& net) {
    write_file_bytes(path, encode_weights(net));
}

Network load_weights(const std::filesystem::path& path) {
    return decode_weights(read_file_bytes(path));
}

}  // namespace sepl
