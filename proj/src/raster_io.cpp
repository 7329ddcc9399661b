#include "sepl/raster_io.hpp"

#include "sepl/error.hpp"
#include "sepl/le_bytes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace sepl {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

std::vector<std::uint8_t> encode_lkm1(const Raster& map) {
    if (map.channels() != 1) throw Error("LKM1 holds single-channel maps only");
    ByteWriter w;
    w.put_magic("LKM1");
    w.put_u32(static_cast<std::uint32_t>(map.width()));
    w.put_u32(static_cast<std::uint32_t>(map.height()));
    for (float v : map.data()) w.put_f32(v);
    return std::move(w).bytes();
}

Raster decode_lkm1(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("LKM1");
    const std::uint32_t width = r.get_u32();
    const std::uint32_t height = r.get_u32();
    const std::uint64_t n = static_cast<std::uint64_t>(width) * height;
    if (r.remaining() != n * 4) throw FormatError("LKM1 payload size mismatch");
    std::vector<float> data(n);
    for (auto& v : data) v = r.get_f32();
    return Raster(static_cast<int>(width), static_cast<int>(height), 1, std::move(data));
}

void write_lkm1(const std::filesystem::path& path, const Raster& map) {
    write_file_bytes(path, encode_lkm1(map));
}

Raster read_lkm1(const std::filesystem::path& path) { return decode_lkm1(read_file_bytes(path)); }

namespace {

std::uint8_t quantize(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

void write_netpbm(const std::filesystem::path& path, const Raster& img, int channels,
                  const char* magic) {
    if (img.channels() != channels) throw Error(std::string(magic) + ": wrong channel count");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << magic << "\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<char> buf;
    buf.reserve(img.data().size());
    for (float v : img.data()) buf.push_back(static_cast<char>(quantize(v)));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// Skips whitespace and '#' comments between header tokens.
int read_header_int(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v = 0;
    if (!(in >> v)) throw FormatError("bad NetPBM header");
    return v;
}

Raster read_netpbm(const std::filesystem::path& path, int channels, const char* magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string m;
    in >> m;
    if (m != magic) throw FormatError(path.string() + " is not a " + magic + " file");
    const int width = read_header_int(in);
    const int height = read_header_int(in);
    const int maxval = read_header_int(in);
    if (width <= 0 || height <= 0 || maxval != 255) {
        throw FormatError("unsupported NetPBM geometry or depth in " + path.string());
    }
    in.get();
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * channels);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw FormatError("truncated pixel data in " + path.string());
    }
    std::vector<float> data(raw.size());
    std::transform(raw.begin(), raw.end(), data.begin(),
                   [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
    return Raster(width, height, channels, std::move(data));
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Raster& gray) {
    write_netpbm(path, gray, 1, "P5");
}
Raster read_pgm(const std::filesystem::path& path) { return read_netpbm(path, 1, "P5"); }
void write_ppm(const std::filesystem::path& path, const Raster& rgb) {
    write_netpbm(path, rgb, 3, "P6");
}
Raster read_ppm(const std::filesystem::path& path) { return read_netpbm(path, 3, "P6"); }

void write_rgbn(const std::filesystem::path& rgb_path, const std::filesystem::path& nir_path,
                const Raster& image) {
    if (image.channels() != 4) throw Error("RGB+NIR image needs 4 channels");
    Raster rgb(image.width(), image.height(), 3);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = image.at(x, y, c);
    write_ppm(rgb_path, rgb);
    write_pgm(nir_path, image.channel(3));
}

Raster read_rgbn(const std::filesystem::path& rgb_path, const std::filesystem::path& nir_path) {
    const Raster rgb = read_ppm(rgb_path);
    const Raster nir = read_pgm(nir_path);
    if (rgb.width() != nir.width() || rgb.height() != nir.height()) {
        throw FormatError("RGB and NIR images differ in size");
    }
    Raster out(rgb.width(), rgb.height(), 4);
    for (int y = 0; y < rgb.height(); ++y) {
        for (int x = 0; x < rgb.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb.at(x, y, c);
            out.at(x, y, 3) = nir.at(x, y);
        }
    }
    return out;
}

}  // namespace sepl
