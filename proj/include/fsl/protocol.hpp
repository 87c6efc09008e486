#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "fsl/batch_code.hpp"
#include "fsl/udpf.hpp"

namespace fsl {

// Two-server private submodel retrieval (PSR) and secure submodel
// aggregation (SSA), semi-honest. Clients pack their selections into cuckoo
// bins, send one DPF key per bin (dummy keys for empty bins) plus stash keys
// over the whole active domain, and servers evaluate each bin key across the
// matching simple bin. Key public parts go to server 0, which forwards them
// to server 1; each server receives its own master seed and expands per-bin
// root seeds from it.

enum class Mode { full_domain, union_restricted, udpf_fixed };

struct SystemSetup {
    TableSpec spec;
    GroupParams group;
    SimpleTable simple;
    std::vector<uint64_t> domain;   // sorted active global indices, |domain| == spec.m
    uint64_t m_global = 0;          // full model size; == |domain| outside union mode
    uint32_t n_clients = 0;
    Mode mode = Mode::full_domain;
    uint32_t stash_depth = 1;

    // Domain ranks of every simple-bin entry, aligned with simple.bins.
    std::vector<std::vector<uint64_t>> bin_ranks;

    DpfParams bin_params(bool psr) const;
    DpfParams stash_params(bool psr) const;
    uint64_t rank_of(uint64_t global_index) const;
};

// Full-domain mode passes domain = {0..m_global-1}; union mode passes the
// public union subset.
SystemSetup make_setup(TableSpec spec, GroupParams group, Mode mode, uint64_t m_global,
                       std::vector<uint64_t> domain, uint32_t n_clients);

struct ClientState {
    uint32_t client_id = 0;
    std::vector<uint64_t> selection;      // distinct active global indices, size <= k
    std::vector<GroupVector> updates;     // parallel to selection (SSA only)
    CuckooTable cuckoo;
    Seed msk0{};
    Seed msk1{};
    bool built = false;

    // Updatable mode: one trapdoor per bin key plus per stash key.
    std::vector<ClientTrapdoor> trapdoors;
    uint64_t last_round = 0;
};

// Builds the cuckoo table and draws the two master seeds.
ClientState make_client(uint32_t client_id, std::vector<uint64_t> selection,
                        std::vector<GroupVector> updates, const SystemSetup& setup, Seed msk0,
                        Seed msk1);

// One of the two messages a client emits per round. The server-0 message
// carries all key public parts; the server-1 message only the master seed
// (public parts reach server 1 over the server-server channel).
struct ClientUpload {
    uint64_t round = 0;
    uint32_t client_id = 0;
    bool carries_pubs = false;
    std::vector<DpfPublicPart> bin_pubs;
    std::vector<DpfPublicPart> stash_pubs;
    Seed msk{};
};

std::pair<ClientUpload, ClientUpload> psr_client_query(const ClientState& state,
                                                       const SystemSetup& setup);
std::pair<ClientUpload, ClientUpload> ssa_client_upload(const ClientState& state,
                                                        const SystemSetup& setup, uint64_t round);

// Round-0 upload of the updatable mode; stores trapdoors into the state.
std::pair<ClientUpload, ClientUpload> ssa_udpf_upload(ClientState& state,
                                                      const SystemSetup& setup);

// Hint covering every bin and stash key for the next round; dummy bins are
// refreshed with beta' = 0. The selection must match round 0.
Hint ssa_udpf_round(ClientState& state, const SystemSetup& setup,
                    const std::vector<uint64_t>& selection,
                    const std::vector<GroupVector>& new_updates, uint64_t round);

// One server's reconstructed key set for one client.
struct ServerKeySet {
    uint8_t party = 0;
    uint64_t round = 0;
    uint32_t client_id = 0;
    std::vector<UdpfKey> bin_keys;
    std::vector<UdpfKey> stash_keys;
    bool updatable = false;
};

ServerKeySet server_assemble(uint8_t party, const ClientUpload& pubs, const Seed& msk,
                             const SystemSetup& setup, bool psr);

void server_apply_hint(ServerKeySet& session, const Hint& hint, const SystemSetup& setup);

// Per-bin retrieval shares, length B + sigma.
std::vector<GroupVector> psr_server_answer(const ServerKeySet& keys,
                                           const std::vector<GroupVector>& w,
                                           const SystemSetup& setup);

std::map<uint64_t, GroupVector> psr_client_reconstruct(const ClientState& state,
                                                       const SystemSetup& setup,
                                                       const std::vector<GroupVector>& share0,
                                                       const std::vector<GroupVector>& share1);

// Whole-domain share of the aggregated update, length |domain|.
struct AggregateTimings {
    double eval_ms = 0;
    double scatter_ms = 0;
};
std::vector<GroupVector> ssa_server_aggregate(const std::vector<ServerKeySet>& sessions,
                                              const SystemSetup& setup,
                                              AggregateTimings* timings = nullptr);

std::vector<GroupVector> ssa_finalize(const std::vector<GroupVector>& share0,
                                      const std::vector<GroupVector>& share1,
                                      const std::vector<GroupVector>& w_prev);

// Re-expands a union-domain result onto the full model: coordinates outside
// the union keep their previous values.
std::vector<GroupVector> expand_union(const SystemSetup& setup,
                                      const std::vector<GroupVector>& domain_values,
                                      const std::vector<GroupVector>& w_prev_global);

// --- message envelope ---------------------------------------------------------
// magic "FSL1" | role byte | round (u64 BE) | client id (u32 BE) |
// payload length (u64 BE) | payload.

enum class Role : uint8_t { psr_q = 1, psr_a = 2, ssa_u = 3, ssa_hint = 4, ssa_share = 5 };

inline constexpr size_t kEnvelopeHeaderBytes = 25;

struct Envelope {
    Role role;
    uint64_t round = 0;
    uint32_t client_id = 0;
    std::vector<uint8_t> payload;
};

std::vector<uint8_t> envelope_serialize(const Envelope& env);
Envelope envelope_deserialize(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> upload_payload(const ClientUpload& upload, const SystemSetup& setup, bool psr);
ClientUpload upload_from_payload(const Envelope& env, const SystemSetup& setup, bool psr);

std::vector<uint8_t> shares_payload(const std::vector<GroupVector>& shares);
std::vector<GroupVector> shares_from_payload(const std::vector<uint8_t>& payload,
                                             GroupParams group);

}  // namespace fsl
