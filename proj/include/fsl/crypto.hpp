#pragma once

#include <array>
#include <cstdint>

#include "fsl/group.hpp"

namespace fsl {

inline constexpr uint32_t kLambda = 128;            // computational security parameter
inline constexpr size_t kSeedBytes = kLambda / 8;

struct Seed {
    std::array<uint8_t, kSeedBytes> bytes{};

    bool operator==(const Seed&) const = default;

    static Seed from_hex(const std::string& hex);
    std::string hex() const;
};

// All symmetric primitives are built on the ChaCha20 block function
// (RFC 8439), keyed as seed || 16-byte domain tag so the PRG, PRF,
// output conversion and epoch hash can never collide on inputs.
namespace chacha {
// Raw block function: 32-byte key, 12-byte nonce, 32-bit counter -> 64 bytes.
void block(const uint8_t key[32], const uint8_t nonce[12], uint32_t counter, uint8_t out[64]);
}  // namespace chacha

struct PrgOutput {
    Seed left;
    Seed right;
    bool t_left;
    bool t_right;
};

// Length-doubling PRG of the DPF tree: one seed in, two seeds plus two
// control bits out.
PrgOutput prg_expand(const Seed& s);

// Per-bin seed derivation from a client's master seed.
Seed prf_derive(const Seed& msk, uint64_t index);

// PRG-based output conversion Seed -> G^tau.
GroupVector convert_to_group(const Seed& s, GroupParams params);

// Epoch-bound random-oracle conversion Seed x N -> G^tau.
GroupVector ro_hash_to_group(const Seed& s, uint64_t epoch, GroupParams params);

// Keyed table hash: 64 bytes of hash material per element, from which the
// batch-code layer slices its eta bin indices.
std::array<uint8_t, 64> element_hash_block(const Seed& hash_seed, uint64_t element);

// Deterministic helper for harness/test seeding (not a protocol primitive).
uint64_t seed_to_u64(const Seed& s);

}  // namespace fsl
