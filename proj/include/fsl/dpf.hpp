#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fsl/crypto.hpp"
#include "fsl/group.hpp"

namespace fsl {

// Two-party distributed point function over {0,1}^depth -> G^tau.
// Tree construction: per level, expand the current seed with the PRG, apply
// the level's correction word when the control bit is set, descend along the
// input bit (most-significant bit first). The final share is
// (-1)^party * (convert(seed) + t * final_cw).

struct DpfParams {
    uint32_t depth = 1;
    GroupParams group{};

    uint64_t domain_size() const { return uint64_t(1) << depth; }

    static void validate(const DpfParams& p) {
        GroupParams::validate(p.group);
        if (p.depth < 1 || p.depth > 32) fail(Errc::parameter, "depth must be in [1, 32]");
    }

    bool operator==(const DpfParams&) const = default;
};

struct CorrectionWord {
    Seed seed_cw{};
    bool t_left = false;
    bool t_right = false;
};

// Identical between the two keys of one Gen call; serialized size is
// depth*(lambda+2) + tau*l bits.
struct DpfPublicPart {
    std::vector<CorrectionWord> cws;
    GroupVector final_cw;
};

struct DpfKey {
    uint8_t party = 0;       // 0 or 1; fixes the root control bit and output sign
    Seed root_seed{};        // the private part
    DpfPublicPart pub;
    DpfParams params{};
};

std::pair<DpfKey, DpfKey> dpf_gen(const DpfParams& params, uint64_t alpha, const GroupVector& beta,
                                  std::optional<std::pair<Seed, Seed>> seeds = std::nullopt);

GroupVector dpf_eval(const DpfKey& key, uint64_t x);

// Single traversal sharing prefix work; output[x] == dpf_eval(key, x).
inline constexpr uint32_t kFullEvalDepthLimit = 24;
std::vector<GroupVector> dpf_eval_full(const DpfKey& key);

// --- wire format -------------------------------------------------------------
//
// Header (8 bytes): magic "DPF1" | depth-and-party byte | l | tau (u16 BE).
// The party bit rides in the top bit of the depth byte (depth <= 32 needs
// only six bits). Payload is an MSB-first bit stream, padded with zeros to a
// whole byte:
//   root_seed (lambda bits)
//   per level: seed_cw (lambda bits), t_left (1 bit), t_right (1 bit)
//   final_cw  (tau*l bits, big-endian per element)
// The public-part-only format uses magic "DPFP", omits root_seed and leaves
// the party bit clear.

size_t dpf_payload_bits(const DpfParams& params);         // lambda + depth*(lambda+2) + tau*l
size_t dpf_public_payload_bits(const DpfParams& params);  // depth*(lambda+2) + tau*l
size_t dpf_public_payload_bytes(const DpfParams& params);

std::vector<uint8_t> dpf_serialize(const DpfKey& key);
DpfKey dpf_deserialize(const std::vector<uint8_t>& bytes,
                       std::optional<DpfParams> expected = std::nullopt);

std::vector<uint8_t> dpf_serialize_public(const DpfPublicPart& pub, const DpfParams& params);
DpfPublicPart dpf_deserialize_public(const std::vector<uint8_t>& bytes, const DpfParams& params);

// Headerless public payload used inside protocol messages, where the
// parameters travel in the round setup instead of per key.
void dpf_write_public_payload(std::vector<uint8_t>& out, const DpfPublicPart& pub,
                              const DpfParams& params);
DpfPublicPart dpf_read_public_payload(const uint8_t* data, size_t size, const DpfParams& params);

// Bit-level accessors, so a message holding many keys pays the byte padding
// once instead of per key.
void dpf_append_public_bits(BitWriter& writer, const DpfPublicPart& pub, const DpfParams& params);
DpfPublicPart dpf_read_public_bits(BitReader& reader, const DpfParams& params);

// Rebuilds one server's key from the shared public part and its PRF-derived
// root seed.
DpfKey dpf_assemble(uint8_t party, const Seed& root_seed, DpfPublicPart pub, const DpfParams& params);

}  // namespace fsl
