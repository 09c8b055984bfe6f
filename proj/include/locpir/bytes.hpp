#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace locpir {

// Thrown when a byte stream is truncated or structurally invalid.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Little-endian byte sink.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }

    void u16(uint16_t v)
    {
        buf_.push_back(static_cast<uint8_t>(v));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }

    void u32(uint32_t v)
    {
        for (int i = 0; i < 4; i++)
            buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void u64(uint64_t v)
    {
        for (int i = 0; i < 8; i++)
            buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void f64(double v)
    {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }

    void bytes(std::span<const uint8_t> b)
    {
        buf_.insert(buf_.end(), b.begin(), b.end());
    }

    size_t size() const { return buf_.size(); }
    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

// Bounds-checked little-endian byte source.
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }

    uint16_t u16()
    {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    uint32_t u32()
    {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; i++)
            v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    uint64_t u64()
    {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; i++)
            v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64()
    {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::span<const uint8_t> bytes(size_t count)
    {
        need(count);
        auto s = data_.subspan(pos_, count);
        pos_ += count;
        return s;
    }

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

    void expect_done() const
    {
        if (!done())
            throw DecodeError("trailing bytes: " + std::to_string(remaining()));
    }

private:
    void need(size_t count) const
    {
        if (data_.size() - pos_ < count)
            throw DecodeError("truncated input: need " + std::to_string(count) +
                              " bytes, have " + std::to_string(remaining()));
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace locpir
