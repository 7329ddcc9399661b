#pragma once

// Little-endian byte encoding helpers shared by the binary file formats.

#include "sepl/error.hpp"

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sepl {

class ByteWriter {
public:
    void put_magic(std::string_view magic) {
        for (char c : magic) buf_.push_back(static_cast<std::uint8_t>(c));
    }
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

    std::vector<std::uint8_t> bytes() && { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void expect_magic(std::string_view magic) {
        need(magic.size());
        for (char c : magic) {
            if (bytes_[pos_++] != static_cast<std::uint8_t>(c)) {
                throw FormatError("bad magic, expected " + std::string(magic));
            }
        }
    }
    std::uint8_t get_u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t get_u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    float get_f32() { return std::bit_cast<float>(get_u32()); }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("unexpected end of data");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace sepl
