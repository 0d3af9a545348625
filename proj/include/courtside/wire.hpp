#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Little-endian binary helpers for the viewer protocol (see docs/protocol.md).

namespace courtside::wire {

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void f64(double v);
    /// u16 byte length followed by the bytes. Throws ValidationError past 65535 bytes.
    void str(std::string_view s);

    /// Patches a u32 previously written at `offset`.
    void patch_u32(std::size_t offset, std::uint32_t v);
    std::size_t size() const noexcept { return buf_.size(); }
    std::vector<std::uint8_t>& bytes() noexcept { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; every accessor throws ParseError on truncation.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    double f64();
    std::string str();

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool done() const noexcept { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace courtside::wire
