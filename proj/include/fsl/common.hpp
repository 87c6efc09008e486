#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsl {

using u128 = unsigned __int128;

// Error taxonomy shared by all modules. Each throw site picks the kind the
// caller is expected to dispatch on (the CLI maps kinds to exit codes).
enum class Errc {
    parameter,        // mismatched or invalid parameters
    domain,           // input outside the declared domain
    format,           // malformed or truncated byte stream
    sequencing,       // epoch/round ordering violation
    protocol,         // inconsistent protocol state between parties
    state,            // operation invoked before required setup
    resource,         // guard against oversized computation
    lookup,           // element not found where required
    cuckoo_overflow,  // insertion failure beyond stash capacity
    unsupported,      // declared unsupported configuration
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline uint32_t ceil_log2(uint64_t v) {
    uint32_t bits = 0;
    while ((uint64_t(1) << bits) < v) ++bits;
    return bits;
}

// --- big-endian byte helpers -------------------------------------------------

inline void put_u16be(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

inline void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline void put_u64be(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint16_t get_u16be(const uint8_t* p) { return uint16_t(p[0]) << 8 | p[1]; }

inline uint32_t get_u32be(const uint8_t* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | p[i];
    return v;
}

inline uint64_t get_u64be(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | p[i];
    return v;
}

// MSB-first bit stream, used by the key wire format so correction-word
// control bits do not cost a padding byte per level.
class BitWriter {
public:
    void write_bit(bool b) {
        if (used_ == 0) {
            bytes_.push_back(0);
            used_ = 8;
        }
        --used_;
        if (b) bytes_.back() |= uint8_t(1) << used_;
        ++bits_;
    }

    void write_bytes(const uint8_t* p, size_t n) {
        for (size_t i = 0; i < n; ++i)
            for (int bit = 7; bit >= 0; --bit) write_bit((p[i] >> bit) & 1);
    }

    void write_uint(u128 v, uint32_t bits) {
        for (int i = int(bits) - 1; i >= 0; --i) write_bit((v >> i) & 1);
    }

    size_t bit_count() const { return bits_; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }
    std::vector<uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<uint8_t> bytes_;
    size_t bits_ = 0;
    unsigned used_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    bool read_bit() {
        if (pos_ >= size_ * 8) fail(Errc::format, "bit stream truncated");
        bool b = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
        ++pos_;
        return b;
    }

    void read_bytes(uint8_t* out, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            uint8_t v = 0;
            for (int bit = 0; bit < 8; ++bit) v = uint8_t(v << 1) | uint8_t(read_bit());
            out[i] = v;
        }
    }

    u128 read_uint(uint32_t bits) {
        u128 v = 0;
        for (uint32_t i = 0; i < bits; ++i) v = v << 1 | u128(read_bit());
        return v;
    }

    size_t bits_consumed() const { return pos_; }

private:
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

std::string to_hex(const std::vector<uint8_t>& bytes);
std::string to_hex(const uint8_t* data, size_t size);
std::vector<uint8_t> from_hex(const std::string& hex);

}  // namespace fsl
