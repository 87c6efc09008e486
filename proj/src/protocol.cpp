#include "fsl/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>

namespace fsl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

GroupParams psr_group(const GroupParams& group) { return GroupParams{group.l, 1}; }

GroupVector psr_beta_one(const GroupParams& group) {
    GroupVector beta(psr_group(group));
    beta.set_elem(0, 1);
    return beta;
}

// Per-client seeds: bin j uses index j, stash slot t uses index B + t.
std::pair<Seed, Seed> bin_seeds(const ClientState& state, uint64_t index) {
    return {prf_derive(state.msk0, index), prf_derive(state.msk1, index)};
}

struct KeyPlan {
    uint64_t alpha = 0;
    GroupVector beta;
    bool dummy = true;
};

// What each bin and stash key must encode for this client.
std::vector<KeyPlan> build_plan(const ClientState& state, const SystemSetup& setup, bool psr) {
    const uint64_t b = setup.spec.bins();
    const GroupParams key_group = psr ? psr_group(setup.group) : setup.group;
    std::vector<KeyPlan> plan(b + setup.spec.sigma);
    for (auto& p : plan) p.beta = group_zero(key_group);

    auto update_of = [&](uint64_t element) -> GroupVector {
        for (size_t i = 0; i < state.selection.size(); ++i)
            if (state.selection[i] == element) return state.updates[i];
        fail(Errc::state, "update missing for selected element");
    };

    for (uint64_t j = 0; j < b; ++j) {
        if (!state.cuckoo.slots[j]) continue;
        const uint64_t element = *state.cuckoo.slots[j];
        plan[j].alpha = lookup_position(setup.simple, j, element);
        plan[j].beta = psr ? psr_beta_one(setup.group) : update_of(element);
        plan[j].dummy = false;
    }
    for (size_t t = 0; t < state.cuckoo.stash.size(); ++t) {
        const uint64_t element = state.cuckoo.stash[t];
        plan[b + t].alpha = setup.rank_of(element);
        plan[b + t].beta = psr ? psr_beta_one(setup.group) : update_of(element);
        plan[b + t].dummy = false;
    }
    return plan;
}

std::pair<ClientUpload, ClientUpload> make_uploads(const ClientState& state,
                                                   const SystemSetup& setup, uint64_t round,
                                                   bool psr, bool updatable,
                                                   std::vector<ClientTrapdoor>* trapdoors_out) {
    if (!state.built) fail(Errc::state, "client cuckoo table not built");
    const uint64_t b = setup.spec.bins();
    auto plan = build_plan(state, setup, psr);

    ClientUpload to_s0{round, state.client_id, true, {}, {}, state.msk0};
    ClientUpload to_s1{round, state.client_id, false, {}, {}, state.msk1};
    to_s0.bin_pubs.reserve(b);
    to_s0.stash_pubs.reserve(setup.spec.sigma);
    if (trapdoors_out) trapdoors_out->clear();

    for (uint64_t idx = 0; idx < plan.size(); ++idx) {
        const bool is_stash = idx >= b;
        const DpfParams params = is_stash ? setup.stash_params(psr) : setup.bin_params(psr);
        auto seeds = bin_seeds(state, idx);
        DpfPublicPart pub;
        if (updatable) {
            auto gen = udpf_gen(params, plan[idx].alpha, plan[idx].beta, seeds);
            pub = std::move(gen.key0.inner.pub);
            if (trapdoors_out) trapdoors_out->push_back(gen.trapdoor);
        } else {
            auto [k0, k1] = dpf_gen(params, plan[idx].alpha, plan[idx].beta, seeds);
            pub = std::move(k0.pub);
        }
        (is_stash ? to_s0.stash_pubs : to_s0.bin_pubs).push_back(std::move(pub));
    }
    return {std::move(to_s0), std::move(to_s1)};
}

}  // namespace

DpfParams SystemSetup::bin_params(bool psr) const {
    return DpfParams{simple.depth, psr ? psr_group(group) : group};
}

DpfParams SystemSetup::stash_params(bool psr) const {
    return DpfParams{stash_depth, psr ? psr_group(group) : group};
}

uint64_t SystemSetup::rank_of(uint64_t global_index) const {
    if (mode != Mode::union_restricted) {
        if (global_index >= m_global) fail(Errc::lookup, "index out of model range");
        return global_index;
    }
    auto it = std::lower_bound(domain.begin(), domain.end(), global_index);
    if (it == domain.end() || *it != global_index) fail(Errc::lookup, "index not in union domain");
    return uint64_t(it - domain.begin());
}

SystemSetup make_setup(TableSpec spec, GroupParams group, Mode mode, uint64_t m_global,
                       std::vector<uint64_t> domain, uint32_t n_clients) {
    GroupParams::validate(group);
    if (domain.size() != spec.m) fail(Errc::parameter, "spec.m must equal the domain size");
    SystemSetup setup;
    setup.simple = build_simple_table(spec, domain);
    setup.spec = std::move(spec);
    setup.group = group;
    setup.domain = std::move(domain);
    setup.m_global = m_global;
    setup.n_clients = n_clients;
    setup.mode = mode;
    setup.stash_depth = std::max(uint32_t(1), ceil_log2(setup.domain.size()));
    setup.bin_ranks.resize(setup.simple.bins.size());
    for (size_t j = 0; j < setup.simple.bins.size(); ++j) {
        setup.bin_ranks[j].reserve(setup.simple.bins[j].size());
        for (uint64_t element : setup.simple.bins[j])
            setup.bin_ranks[j].push_back(setup.rank_of(element));
    }
    return setup;
}

ClientState make_client(uint32_t client_id, std::vector<uint64_t> selection,
                        std::vector<GroupVector> updates, const SystemSetup& setup, Seed msk0,
                        Seed msk1) {
    if (!updates.empty() && updates.size() != selection.size())
        fail(Errc::parameter, "updates must parallel the selection");
    for (uint64_t element : selection) setup.rank_of(element);  // membership check

    ClientState state;
    state.client_id = client_id;
    state.selection = std::move(selection);
    state.updates = std::move(updates);
    state.cuckoo = build_cuckoo_table(setup.spec, state.selection);
    state.msk0 = msk0;
    state.msk1 = msk1;
    state.built = true;
    return state;
}

std::pair<ClientUpload, ClientUpload> psr_client_query(const ClientState& state,
                                                       const SystemSetup& setup) {
    return make_uploads(state, setup, 0, /*psr=*/true, /*updatable=*/false, nullptr);
}

std::pair<ClientUpload, ClientUpload> ssa_client_upload(const ClientState& state,
                                                        const SystemSetup& setup, uint64_t round) {
    if (state.updates.size() != state.selection.size())
        fail(Errc::state, "client holds no updates");
    return make_uploads(state, setup, round, /*psr=*/false, /*updatable=*/false, nullptr);
}

std::pair<ClientUpload, ClientUpload> ssa_udpf_upload(ClientState& state,
                                                      const SystemSetup& setup) {
    if (state.updates.size() != state.selection.size())
        fail(Errc::state, "client holds no updates");
    auto uploads =
        make_uploads(state, setup, 0, /*psr=*/false, /*updatable=*/true, &state.trapdoors);
    state.last_round = 0;
    return uploads;
}

Hint ssa_udpf_round(ClientState& state, const SystemSetup& setup,
                    const std::vector<uint64_t>& selection,
                    const std::vector<GroupVector>& new_updates, uint64_t round) {
    if (state.trapdoors.empty()) fail(Errc::state, "no round-0 keys to update");
    if (selection != state.selection)
        fail(Errc::state, "selection must stay fixed in updatable mode");
    if (new_updates.size() != selection.size())
        fail(Errc::parameter, "updates must parallel the selection");
    if (round != state.last_round + 1) fail(Errc::sequencing, "round must increase by one");

    state.updates = new_updates;
    auto plan = build_plan(state, setup, /*psr=*/false);

    Hint hint;
    hint.epoch = round;
    hint.new_final_cws.reserve(plan.size());
    for (size_t idx = 0; idx < plan.size(); ++idx)
        hint.new_final_cws.push_back(udpf_next_cw(state.trapdoors[idx], plan[idx].beta, round));
    state.last_round = round;
    return hint;
}

ServerKeySet server_assemble(uint8_t party, const ClientUpload& pubs, const Seed& msk,
                             const SystemSetup& setup, bool psr) {
    if (!pubs.carries_pubs) fail(Errc::protocol, "upload carries no public parts");
    const uint64_t b = setup.spec.bins();
    if (pubs.bin_pubs.size() != b || pubs.stash_pubs.size() != setup.spec.sigma)
        fail(Errc::protocol, "public part count mismatch");

    ServerKeySet keys;
    keys.party = party;
    keys.round = pubs.round;
    keys.client_id = pubs.client_id;
    keys.updatable = setup.mode == Mode::udpf_fixed;
    keys.bin_keys.reserve(b);
    keys.stash_keys.reserve(setup.spec.sigma);
    for (uint64_t j = 0; j < b; ++j)
        keys.bin_keys.push_back(UdpfKey{
            dpf_assemble(party, prf_derive(msk, j), pubs.bin_pubs[j], setup.bin_params(psr)),
            pubs.round});
    for (uint32_t t = 0; t < setup.spec.sigma; ++t)
        keys.stash_keys.push_back(UdpfKey{dpf_assemble(party, prf_derive(msk, b + t),
                                                       pubs.stash_pubs[t],
                                                       setup.stash_params(psr)),
                                          pubs.round});
    return keys;
}

void server_apply_hint(ServerKeySet& session, const Hint& hint, const SystemSetup& setup) {
    const uint64_t b = setup.spec.bins();
    if (!session.updatable) fail(Errc::state, "session keys are not updatable");
    if (hint.new_final_cws.size() != b + setup.spec.sigma)
        fail(Errc::protocol, "hint must cover every bin and stash key");
    for (uint64_t j = 0; j < b; ++j)
        session.bin_keys[j] = udpf_update(session.bin_keys[j], hint, j);
    for (uint32_t t = 0; t < setup.spec.sigma; ++t)
        session.stash_keys[t] = udpf_update(session.stash_keys[t], hint, b + t);
    session.round = hint.epoch;
}

namespace {

std::vector<GroupVector> eval_key_full(const UdpfKey& key, bool updatable) {
    return updatable ? udpf_eval_full(key) : dpf_eval_full(key.inner);
}

}  // namespace

std::vector<GroupVector> psr_server_answer(const ServerKeySet& keys,
                                           const std::vector<GroupVector>& w,
                                           const SystemSetup& setup) {
    if (w.size() != setup.domain.size()) fail(Errc::protocol, "weight vector length mismatch");
    const uint64_t b = setup.spec.bins();
    std::vector<GroupVector> shares;
    shares.reserve(b + setup.spec.sigma);

    for (uint64_t j = 0; j < b; ++j) {
        GroupVector acc = group_zero(setup.group);
        if (!setup.simple.bins[j].empty()) {
            auto vals = eval_key_full(keys.bin_keys[j], keys.updatable);
            for (size_t d = 0; d < setup.simple.bins[j].size(); ++d)
                acc.add_in_place(group_scale(w[setup.bin_ranks[j][d]], vals[d].elem(0)));
        }
        shares.push_back(std::move(acc));
    }
    for (uint32_t t = 0; t < setup.spec.sigma; ++t) {
        GroupVector acc = group_zero(setup.group);
        auto vals = eval_key_full(keys.stash_keys[t], keys.updatable);
        for (size_t x = 0; x < setup.domain.size(); ++x)
            acc.add_in_place(group_scale(w[x], vals[x].elem(0)));
        shares.push_back(std::move(acc));
    }
    return shares;
}

std::map<uint64_t, GroupVector> psr_client_reconstruct(const ClientState& state,
                                                       const SystemSetup& setup,
                                                       const std::vector<GroupVector>& share0,
                                                       const std::vector<GroupVector>& share1) {
    const uint64_t b = setup.spec.bins();
    const size_t expected = b + setup.spec.sigma;
    if (share0.size() != expected || share1.size() != expected)
        fail(Errc::protocol, "share vector length mismatch");

    std::map<uint64_t, GroupVector> result;
    for (uint64_t j = 0; j < b; ++j)
        if (state.cuckoo.slots[j])
            result.emplace(*state.cuckoo.slots[j], group_add(share0[j], share1[j]));
    for (size_t t = 0; t < state.cuckoo.stash.size(); ++t)
        result.emplace(state.cuckoo.stash[t], group_add(share0[b + t], share1[b + t]));
    return result;
}

std::vector<GroupVector> ssa_server_aggregate(const std::vector<ServerKeySet>& sessions,
                                              const SystemSetup& setup,
                                              AggregateTimings* timings) {
    std::vector<GroupVector> share(setup.domain.size(), group_zero(setup.group));
    if (sessions.empty()) return share;
    for (const auto& s : sessions)
        if (s.round != sessions.front().round) fail(Errc::protocol, "mixed rounds in a batch");

    const uint64_t b = setup.spec.bins();
    for (const auto& session : sessions) {
        for (uint64_t j = 0; j < b; ++j) {
            if (setup.simple.bins[j].empty()) continue;
            auto t0 = Clock::now();
            auto vals = eval_key_full(session.bin_keys[j], session.updatable);
            if (timings) timings->eval_ms += ms_since(t0);
            auto t1 = Clock::now();
            for (size_t d = 0; d < setup.simple.bins[j].size(); ++d)
                share[setup.bin_ranks[j][d]].add_in_place(vals[d]);
            if (timings) timings->scatter_ms += ms_since(t1);
        }
        for (const auto& stash_key : session.stash_keys) {
            auto t0 = Clock::now();
            auto vals = eval_key_full(stash_key, session.updatable);
            if (timings) timings->eval_ms += ms_since(t0);
            auto t1 = Clock::now();
            for (size_t x = 0; x < setup.domain.size(); ++x) share[x].add_in_place(vals[x]);
            if (timings) timings->scatter_ms += ms_since(t1);
        }
    }
    return share;
}

std::vector<GroupVector> ssa_finalize(const std::vector<GroupVector>& share0,
                                      const std::vector<GroupVector>& share1,
                                      const std::vector<GroupVector>& w_prev) {
    if (share0.size() != share1.size() || share0.size() != w_prev.size())
        fail(Errc::protocol, "share length mismatch");
    std::vector<GroupVector> out;
    out.reserve(w_prev.size());
    for (size_t i = 0; i < w_prev.size(); ++i)
        out.push_back(group_add(group_add(share0[i], share1[i]), w_prev[i]));
    return out;
}

std::vector<GroupVector> expand_union(const SystemSetup& setup,
                                      const std::vector<GroupVector>& domain_values,
                                      const std::vector<GroupVector>& w_prev_global) {
    if (domain_values.size() != setup.domain.size())
        fail(Errc::protocol, "domain value length mismatch");
    if (w_prev_global.size() != setup.m_global)
        fail(Errc::protocol, "previous weights length mismatch");
    std::vector<GroupVector> out = w_prev_global;
    for (size_t r = 0; r < setup.domain.size(); ++r) out[setup.domain[r]] = domain_values[r];
    return out;
}

// --- envelopes ----------------------------------------------------------------

std::vector<uint8_t> envelope_serialize(const Envelope& env) {
    std::vector<uint8_t> out;
    out.reserve(kEnvelopeHeaderBytes + env.payload.size());
    out.insert(out.end(), {'F', 'S', 'L', '1'});
    out.push_back(uint8_t(env.role));
    put_u64be(out, env.round);
    put_u32be(out, env.client_id);
    put_u64be(out, env.payload.size());
    out.insert(out.end(), env.payload.begin(), env.payload.end());
    return out;
}

Envelope envelope_deserialize(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < kEnvelopeHeaderBytes) fail(Errc::format, "envelope truncated");
    if (std::memcmp(bytes.data(), "FSL1", 4) != 0) fail(Errc::format, "bad envelope magic");
    Envelope env;
    const uint8_t role = bytes[4];
    if (role < 1 || role > 5) fail(Errc::format, "unknown role byte");
    env.role = Role(role);
    env.round = get_u64be(bytes.data() + 5);
    env.client_id = get_u32be(bytes.data() + 13);
    const uint64_t len = get_u64be(bytes.data() + 17);
    if (bytes.size() != kEnvelopeHeaderBytes + len) fail(Errc::format, "payload length mismatch");
    env.payload.assign(bytes.begin() + kEnvelopeHeaderBytes, bytes.end());
    return env;
}

namespace {

// All key public parts of one upload form a single bit stream, so the byte
// padding is paid once per message rather than per key.
size_t upload_key_block_bytes(const SystemSetup& setup, bool psr) {
    const size_t bits = setup.spec.bins() * dpf_public_payload_bits(setup.bin_params(psr)) +
                        setup.spec.sigma * dpf_public_payload_bits(setup.stash_params(psr));
    return (bits + 7) / 8;
}

}  // namespace

std::vector<uint8_t> upload_payload(const ClientUpload& upload, const SystemSetup& setup,
                                    bool psr) {
    std::vector<uint8_t> out;
    if (upload.carries_pubs) {
        BitWriter w;
        for (const auto& pub : upload.bin_pubs)
            dpf_append_public_bits(w, pub, setup.bin_params(psr));
        for (const auto& pub : upload.stash_pubs)
            dpf_append_public_bits(w, pub, setup.stash_params(psr));
        out = w.take();
    }
    out.insert(out.end(), upload.msk.bytes.begin(), upload.msk.bytes.end());
    return out;
}

ClientUpload upload_from_payload(const Envelope& env, const SystemSetup& setup, bool psr) {
    ClientUpload upload;
    upload.round = env.round;
    upload.client_id = env.client_id;
    if (env.payload.size() == kSeedBytes) {
        upload.carries_pubs = false;
        std::memcpy(upload.msk.bytes.data(), env.payload.data(), kSeedBytes);
        return upload;
    }
    const uint64_t b = setup.spec.bins();
    const size_t key_block = upload_key_block_bytes(setup, psr);
    if (env.payload.size() != key_block + kSeedBytes)
        fail(Errc::format, "upload payload length mismatch");

    upload.carries_pubs = true;
    BitReader r(env.payload.data(), key_block);
    for (uint64_t j = 0; j < b; ++j)
        upload.bin_pubs.push_back(dpf_read_public_bits(r, setup.bin_params(psr)));
    for (uint32_t t = 0; t < setup.spec.sigma; ++t)
        upload.stash_pubs.push_back(dpf_read_public_bits(r, setup.stash_params(psr)));
    std::memcpy(upload.msk.bytes.data(), env.payload.data() + key_block, kSeedBytes);
    return upload;
}

std::vector<uint8_t> shares_payload(const std::vector<GroupVector>& shares) {
    std::vector<uint8_t> out;
    put_u32be(out, uint32_t(shares.size()));
    for (const auto& s : shares) {
        auto bytes = s.to_bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

std::vector<GroupVector> shares_from_payload(const std::vector<uint8_t>& payload,
                                             GroupParams group) {
    if (payload.size() < 4) fail(Errc::format, "share payload truncated");
    const uint32_t count = get_u32be(payload.data());
    const size_t each = group.element_bytes();
    if (payload.size() != 4 + size_t(count) * each) fail(Errc::format, "share payload mismatch");
    std::vector<GroupVector> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        out.push_back(GroupVector::from_bytes(group, payload.data() + 4 + size_t(i) * each, each));
    return out;
}

}  // namespace fsl
