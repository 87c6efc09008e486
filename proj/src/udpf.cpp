#include "fsl/udpf.hpp"

#include <cstring>

namespace fsl {

namespace {

GroupVector masked_cw(const Seed& s0, const Seed& s1, bool t1, const GroupVector& beta,
                      uint64_t epoch) {
    GroupVector cw = group_sub(group_add(beta, ro_hash_to_group(s1, epoch, beta.params())),
                               ro_hash_to_group(s0, epoch, beta.params()));
    return t1 ? group_neg(cw) : cw;
}

struct PathEnd {
    Seed seed;
    bool t;
};

PathEnd walk_to(const DpfKey& key, uint64_t x) {
    Seed s = key.root_seed;
    bool t = key.party == 1;
    for (uint32_t level = 0; level < key.params.depth; ++level) {
        const bool bit = (x >> (key.params.depth - 1 - level)) & 1;
        PrgOutput exp = prg_expand(s);
        Seed next = bit ? exp.right : exp.left;
        bool next_t = bit ? exp.t_right : exp.t_left;
        if (t) {
            const CorrectionWord& cw = key.pub.cws[level];
            for (size_t i = 0; i < kSeedBytes; ++i) next.bytes[i] ^= cw.seed_cw.bytes[i];
            next_t ^= bit ? cw.t_right : cw.t_left;
        }
        s = next;
        t = next_t;
    }
    return {s, t};
}

}  // namespace

UdpfGenResult udpf_gen(const DpfParams& params, uint64_t alpha, const GroupVector& beta,
                       std::optional<std::pair<Seed, Seed>> seeds) {
    // Reuse the tree of the plain generation, then rebuild the final
    // correction word with the epoch-0 hash so evaluation has one code path.
    auto [k0, k1] = dpf_gen(params, alpha, beta, seeds);
    PathEnd end0 = walk_to(k0, alpha);
    PathEnd end1 = walk_to(k1, alpha);

    GroupVector cw = masked_cw(end0.seed, end1.seed, end1.t, beta, 0);
    k0.pub.final_cw = cw;
    k1.pub.final_cw = cw;

    ClientTrapdoor trapdoor{end0.seed, end1.seed, end1.t, 0, params.group};
    return {UdpfKey{std::move(k0), 0}, UdpfKey{std::move(k1), 0}, trapdoor};
}

GroupVector udpf_eval(const UdpfKey& key, uint64_t x) {
    if (x >= key.inner.params.domain_size()) fail(Errc::domain, "x out of range");
    PathEnd end = walk_to(key.inner, x);
    GroupVector out = ro_hash_to_group(end.seed, key.epoch, key.inner.params.group);
    if (end.t) out.add_in_place(key.inner.pub.final_cw);
    return key.inner.party == 1 ? group_neg(out) : out;
}

std::vector<GroupVector> udpf_eval_full(const UdpfKey& key) {
    if (key.inner.params.depth > kFullEvalDepthLimit)
        fail(Errc::resource, "full evaluation depth guard");
    const DpfKey& k = key.inner;
    std::vector<GroupVector> out;
    out.reserve(k.params.domain_size());

    struct Frame {
        Seed seed;
        bool t;
        uint32_t level;
    };
    std::vector<Frame> stack;
    stack.push_back({k.root_seed, k.party == 1, 0});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.level == k.params.depth) {
            GroupVector share = ro_hash_to_group(f.seed, key.epoch, k.params.group);
            if (f.t) share.add_in_place(k.pub.final_cw);
            out.push_back(k.party == 1 ? group_neg(share) : std::move(share));
            continue;
        }
        const CorrectionWord& cw = k.pub.cws[f.level];
        PrgOutput exp = prg_expand(f.seed);
        if (f.t) {
            for (size_t i = 0; i < kSeedBytes; ++i) {
                exp.left.bytes[i] ^= cw.seed_cw.bytes[i];
                exp.right.bytes[i] ^= cw.seed_cw.bytes[i];
            }
            exp.t_left ^= cw.t_left;
            exp.t_right ^= cw.t_right;
        }
        stack.push_back({exp.right, exp.t_right, f.level + 1});
        stack.push_back({exp.left, exp.t_left, f.level + 1});
    }
    return out;
}

GroupVector udpf_next_cw(ClientTrapdoor& trapdoor, const GroupVector& beta_prime, uint64_t epoch) {
    if (!(beta_prime.params() == trapdoor.group)) fail(Errc::parameter, "beta group mismatch");
    if (epoch != trapdoor.last_epoch + 1) fail(Errc::sequencing, "epoch must increase by one");
    GroupVector cw =
        masked_cw(trapdoor.final_seed0, trapdoor.final_seed1, trapdoor.final_t1, beta_prime, epoch);
    trapdoor.last_epoch = epoch;
    return cw;
}

Hint udpf_next(ClientTrapdoor& trapdoor, const GroupVector& beta_prime, uint64_t epoch) {
    Hint hint;
    hint.epoch = epoch;
    hint.new_final_cws.push_back(udpf_next_cw(trapdoor, beta_prime, epoch));
    return hint;
}

ClientTrapdoor udpf_trapdoor_from_keys(const UdpfKey& key0, const UdpfKey& key1, uint64_t alpha) {
    if (!(key0.inner.params == key1.inner.params)) fail(Errc::parameter, "key parameter mismatch");
    PathEnd end0 = walk_to(key0.inner, alpha);
    PathEnd end1 = walk_to(key1.inner, alpha);
    return ClientTrapdoor{end0.seed, end1.seed, end1.t, key0.epoch, key0.inner.params.group};
}

UdpfKey udpf_update(const UdpfKey& key, const Hint& hint, size_t index) {
    if (hint.epoch != key.epoch + 1) fail(Errc::sequencing, "hint epoch mismatch");
    if (index >= hint.new_final_cws.size()) fail(Errc::parameter, "hint index out of range");
    UdpfKey updated = key;
    updated.inner.pub.final_cw = hint.new_final_cws[index];
    updated.epoch = hint.epoch;
    return updated;
}

std::vector<uint8_t> hint_serialize(const Hint& hint) {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'U', 'H', 'N', 'T'});
    put_u64be(out, hint.epoch);
    put_u32be(out, uint32_t(hint.new_final_cws.size()));
    for (const auto& cw : hint.new_final_cws) {
        auto bytes = cw.to_bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

Hint hint_deserialize(const std::vector<uint8_t>& bytes, GroupParams group) {
    if (bytes.size() < 16) fail(Errc::format, "hint truncated");
    if (std::memcmp(bytes.data(), "UHNT", 4) != 0) fail(Errc::format, "bad hint magic");
    Hint hint;
    hint.epoch = get_u64be(bytes.data() + 4);
    const uint32_t count = get_u32be(bytes.data() + 12);
    const size_t cw_bytes = group.element_bytes();
    if (bytes.size() != 16 + size_t(count) * cw_bytes) fail(Errc::format, "hint length mismatch");
    hint.new_final_cws.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        hint.new_final_cws.push_back(
            GroupVector::from_bytes(group, bytes.data() + 16 + size_t(i) * cw_bytes, cw_bytes));
    return hint;
}

}  // namespace fsl
