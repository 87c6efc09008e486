#include "fsl/crypto.hpp"

#include <cstring>

#include "fsl/common.hpp"

namespace fsl {

namespace chacha {

namespace {

inline uint32_t rotl(uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

inline void quarter_round(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
    a += b; d ^= a; d = rotl(d, 16);
    c += d; b ^= c; b = rotl(b, 12);
    a += b; d ^= a; d = rotl(d, 8);
    c += d; b ^= c; b = rotl(b, 7);
}

inline uint32_t load_le32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

inline void store_le32(uint8_t* p, uint32_t v) {
    p[0] = uint8_t(v);
    p[1] = uint8_t(v >> 8);
    p[2] = uint8_t(v >> 16);
    p[3] = uint8_t(v >> 24);
}

}  // namespace

void block(const uint8_t key[32], const uint8_t nonce[12], uint32_t counter, uint8_t out[64]) {
    uint32_t state[16];
    state[0] = 0x61707865;
    state[1] = 0x3320646e;
    state[2] = 0x79622d32;
    state[3] = 0x6b206574;
    for (int i = 0; i < 8; ++i) state[4 + i] = load_le32(key + 4 * i);
    state[12] = counter;
    for (int i = 0; i < 3; ++i) state[13 + i] = load_le32(nonce + 4 * i);

    uint32_t w[16];
    std::memcpy(w, state, sizeof(w));
    for (int round = 0; round < 10; ++round) {
        quarter_round(w[0], w[4], w[8], w[12]);
        quarter_round(w[1], w[5], w[9], w[13]);
        quarter_round(w[2], w[6], w[10], w[14]);
        quarter_round(w[3], w[7], w[11], w[15]);
        quarter_round(w[0], w[5], w[10], w[15]);
        quarter_round(w[1], w[6], w[11], w[12]);
        quarter_round(w[2], w[7], w[8], w[13]);
        quarter_round(w[3], w[4], w[9], w[14]);
    }
    for (int i = 0; i < 16; ++i) store_le32(out + 4 * i, w[i] + state[i]);
}

}  // namespace chacha

namespace {

// 16-byte domain tags appended to the seed to form the 32-byte block key.
constexpr uint8_t kTagPrg[16] = {'f', 's', 'l', '.', 'p', 'r', 'g', '.', 'v', '1', 0, 0, 0, 0, 0, 0};
constexpr uint8_t kTagPrf[16] = {'f', 's', 'l', '.', 'p', 'r', 'f', '.', 'v', '1', 0, 0, 0, 0, 0, 0};
constexpr uint8_t kTagCnv[16] = {'f', 's', 'l', '.', 'c', 'n', 'v', '.', 'v', '1', 0, 0, 0, 0, 0, 0};
constexpr uint8_t kTagRoh[16] = {'f', 's', 'l', '.', 'r', 'o', 'h', '.', 'v', '1', 0, 0, 0, 0, 0, 0};
constexpr uint8_t kTagBin[16] = {'f', 's', 'l', '.', 'b', 'i', 'n', '.', 'v', '1', 0, 0, 0, 0, 0, 0};

void make_key(const Seed& s, const uint8_t tag[16], uint8_t key[32]) {
    std::memcpy(key, s.bytes.data(), kSeedBytes);
    std::memcpy(key + kSeedBytes, tag, 16);
}

void nonce_from_u64(uint64_t v, uint8_t nonce[12]) {
    std::memset(nonce, 0, 12);
    for (int i = 0; i < 8; ++i) nonce[i] = uint8_t(v >> (8 * i));
}

// Fills out[0..n) with keystream blocks, counter starting at 0.
void stream(const uint8_t key[32], const uint8_t nonce[12], uint8_t* out, size_t n) {
    uint8_t block_buf[64];
    uint32_t counter = 0;
    while (n > 0) {
        chacha::block(key, nonce, counter++, block_buf);
        const size_t take = n < 64 ? n : 64;
        std::memcpy(out, block_buf, take);
        out += take;
        n -= take;
    }
}

GroupVector bytes_to_group(const uint8_t* data, GroupParams params) {
    return GroupVector::from_bytes(params, data, params.element_bytes());
}

}  // namespace

Seed Seed::from_hex(const std::string& hex) {
    auto bytes = fsl::from_hex(hex);
    if (bytes.size() != kSeedBytes) fail(Errc::format, "seed hex must be 16 bytes");
    Seed s;
    std::memcpy(s.bytes.data(), bytes.data(), kSeedBytes);
    return s;
}

std::string Seed::hex() const { return to_hex(bytes.data(), bytes.size()); }

PrgOutput prg_expand(const Seed& s) {
    uint8_t key[32];
    make_key(s, kTagPrg, key);
    uint8_t nonce[12] = {};
    uint8_t out[64];
    chacha::block(key, nonce, 0, out);
    PrgOutput r;
    std::memcpy(r.left.bytes.data(), out, kSeedBytes);
    std::memcpy(r.right.bytes.data(), out + kSeedBytes, kSeedBytes);
    r.t_left = out[32] & 1;
    r.t_right = out[33] & 1;
    return r;
}

Seed prf_derive(const Seed& msk, uint64_t index) {
    uint8_t key[32];
    make_key(msk, kTagPrf, key);
    uint8_t nonce[12];
    nonce_from_u64(index, nonce);
    uint8_t out[64];
    chacha::block(key, nonce, 0, out);
    Seed r;
    std::memcpy(r.bytes.data(), out, kSeedBytes);
    return r;
}

GroupVector convert_to_group(const Seed& s, GroupParams params) {
    GroupParams::validate(params);
    uint8_t key[32];
    make_key(s, kTagCnv, key);
    uint8_t nonce[12] = {};
    std::vector<uint8_t> buf(params.element_bytes());
    stream(key, nonce, buf.data(), buf.size());
    return bytes_to_group(buf.data(), params);
}

GroupVector ro_hash_to_group(const Seed& s, uint64_t epoch, GroupParams params) {
    GroupParams::validate(params);
    uint8_t key[32];
    make_key(s, kTagRoh, key);
    uint8_t nonce[12];
    nonce_from_u64(epoch, nonce);
    std::vector<uint8_t> buf(params.element_bytes());
    stream(key, nonce, buf.data(), buf.size());
    return bytes_to_group(buf.data(), params);
}

std::array<uint8_t, 64> element_hash_block(const Seed& hash_seed, uint64_t element) {
    uint8_t key[32];
    make_key(hash_seed, kTagBin, key);
    uint8_t nonce[12];
    nonce_from_u64(element, nonce);
    std::array<uint8_t, 64> out;
    chacha::block(key, nonce, 0, out.data());
    return out;
}

uint64_t seed_to_u64(const Seed& s) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(s.bytes[i]) << (8 * i);
    return v;
}

std::string to_hex(const uint8_t* data, size_t size) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (size_t i = 0; i < size; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

std::string to_hex(const std::vector<uint8_t>& bytes) { return to_hex(bytes.data(), bytes.size()); }

std::vector<uint8_t> from_hex(const std::string& hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) fail(Errc::format, "odd hex length");
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) fail(Errc::format, "invalid hex digit");
        out[i] = uint8_t(hi << 4 | lo);
    }
    return out;
}

}  // namespace fsl
