#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "rms/errors.hpp"

namespace rms {

// Bits are packed MSB-first; the final byte is zero-padded.
class BitWriter {
public:
    void put(bool bit) {
        acc_ = static_cast<uint8_t>((acc_ << 1) | (bit ? 1 : 0));
        if (++fill_ == 8) {
            bytes_.push_back(acc_);
            acc_ = 0;
            fill_ = 0;
        }
        ++nbits_;
    }

    uint64_t bit_count() const { return nbits_; }

    std::vector<uint8_t> finish() {
        std::vector<uint8_t> out = bytes_;
        if (fill_ > 0)
            out.push_back(static_cast<uint8_t>(acc_ << (8 - fill_)));
        return out;
    }

private:
    std::vector<uint8_t> bytes_;
    uint8_t acc_ = 0;
    int fill_ = 0;
    uint64_t nbits_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, uint64_t bit_count)
        : data_(data), bit_count_(bit_count) {}

    bool get() {
        // callers are expected to range-check via pos()/size()
        uint64_t byte = pos_ >> 3;
        int off = static_cast<int>(pos_ & 7);
        ++pos_;
        return (data_[byte] >> (7 - off)) & 1;
    }

    uint64_t pos() const { return pos_; }
    uint64_t size() const { return bit_count_; }

private:
    const uint8_t* data_;
    uint64_t bit_count_;
    uint64_t pos_ = 0;
};

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16be(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v >> 8));
        buf_.push_back(static_cast<uint8_t>(v & 0xff));
    }
    void u32be(uint32_t v) {
        buf_.push_back(static_cast<uint8_t>(v >> 24));
        buf_.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
        buf_.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
        buf_.push_back(static_cast<uint8_t>(v & 0xff));
    }
    void bytes(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint16_t u16be() {
        need(2);
        uint16_t v = static_cast<uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    uint32_t u32be() {
        need(4);
        uint32_t v = (static_cast<uint32_t>(data_[pos_]) << 24) |
                     (static_cast<uint32_t>(data_[pos_ + 1]) << 16) |
                     (static_cast<uint32_t>(data_[pos_ + 2]) << 8) |
                     static_cast<uint32_t>(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    const uint8_t* bytes(size_t n) {
        need(n);
        const uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }
    size_t pos() const { return pos_; }
    size_t remaining() const { return size_ - pos_; }

private:
    void need(size_t n) const {
        if (size_ - pos_ < n)
            throw FormatError("unexpected end of stream header");
    }
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

inline void leb128_write(std::vector<uint8_t>& out, uint64_t v) {
    for (;;) {
        uint8_t b = v & 0x7f;
        v >>= 7;
        if (v != 0) {
            out.push_back(b | 0x80);
        } else {
            out.push_back(b);
            return;
        }
    }
}

// Reads one varint from [p, end); advances p. Throws FormatError on overrun.
inline uint64_t leb128_read(const uint8_t*& p, const uint8_t* end) {
    uint64_t v = 0;
    int shift = 0;
    for (;;) {
        if (p == end)
            throw FormatError("truncated varint");
        if (shift >= 64)
            throw FormatError("varint overflow");
        uint8_t b = *p++;
        v |= static_cast<uint64_t>(b & 0x7f) << shift;
        if (!(b & 0x80))
            return v;
        shift += 7;
    }
}

} // namespace rms
