#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpe {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline void append_bytes(Bytes& out, BytesView b) {
    out.insert(out.end(), b.begin(), b.end());
}

inline void append_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void append_u16(Bytes& out, uint16_t v) {
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

inline void append_u32(Bytes& out, uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline void append_u64(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

/// Sequential reader over a byte buffer; throws on underrun.
class ByteReader {
public:
    explicit ByteReader(BytesView data) : data_(data) {}

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

    uint8_t u8() { return take(1)[0]; }

    uint16_t u16() {
        auto b = take(2);
        return uint16_t(b[0]) << 8 | b[1];
    }

    uint32_t u32() {
        auto b = take(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | b[i];
        return v;
    }

    uint64_t u64() {
        auto b = take(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | b[i];
        return v;
    }

    BytesView take(size_t n) {
        if (remaining() < n) throw std::runtime_error("byte buffer underrun");
        BytesView out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    Bytes take_vec(size_t n) {
        auto v = take(n);
        return Bytes(v.begin(), v.end());
    }

private:
    BytesView data_;
    size_t pos_ = 0;
};

inline std::string to_hex(BytesView b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

}  // namespace vpe
