#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fsl/dpf.hpp"

namespace fsl {

// Updatable DPF: the same tree as the plain DPF, but output conversion is the
// epoch-bound hash, so re-targeting beta across rounds only replaces the
// final correction word. The replacement travels as a Hint, identical for
// both servers.

struct UdpfKey {
    DpfKey inner;
    uint64_t epoch = 0;  // the final_cw stored in inner was built for this epoch
};

// What the client retains per key to run Next without either full key: the
// two final-level seeds at path alpha and party 1's final control bit.
struct ClientTrapdoor {
    Seed final_seed0{};
    Seed final_seed1{};
    bool final_t1 = false;
    uint64_t last_epoch = 0;
    GroupParams group{};
};

struct Hint {
    uint64_t epoch = 0;
    std::vector<GroupVector> new_final_cws;  // one per updated key, bin order
};

struct UdpfGenResult {
    UdpfKey key0;
    UdpfKey key1;
    ClientTrapdoor trapdoor;
};

UdpfGenResult udpf_gen(const DpfParams& params, uint64_t alpha, const GroupVector& beta,
                       std::optional<std::pair<Seed, Seed>> seeds = std::nullopt);

GroupVector udpf_eval(const UdpfKey& key, uint64_t x);
std::vector<GroupVector> udpf_eval_full(const UdpfKey& key);

// Computes the replacement final correction word for the next epoch and
// advances the trapdoor. Epochs must increase by exactly one.
GroupVector udpf_next_cw(ClientTrapdoor& trapdoor, const GroupVector& beta_prime, uint64_t epoch);

// Single-key convenience wrapper building a one-entry Hint.
Hint udpf_next(ClientTrapdoor& trapdoor, const GroupVector& beta_prime, uint64_t epoch);

// Equivalent trapdoor recovered from both full keys (the client knows alpha).
ClientTrapdoor udpf_trapdoor_from_keys(const UdpfKey& key0, const UdpfKey& key1, uint64_t alpha);

// Applies entry `index` of the hint; returns the re-targeted key.
UdpfKey udpf_update(const UdpfKey& key, const Hint& hint, size_t index = 0);

// --- wire format -------------------------------------------------------------
// magic "UHNT" (4 bytes), epoch (u64 BE), count (u32 BE), then count final
// correction words of tau*l/8 bytes each, bin order ascending.

std::vector<uint8_t> hint_serialize(const Hint& hint);
Hint hint_deserialize(const std::vector<uint8_t>& bytes, GroupParams group);

}  // namespace fsl
