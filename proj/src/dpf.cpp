#include "fsl/dpf.hpp"

#include <cstring>
#include <random>

namespace fsl {

namespace {

constexpr char kMagicFull[4] = {'D', 'P', 'F', '1'};
constexpr char kMagicPublic[4] = {'D', 'P', 'F', 'P'};

void xor_seed(Seed& a, const Seed& b) {
    for (size_t i = 0; i < kSeedBytes; ++i) a.bytes[i] ^= b.bytes[i];
}

struct Node {
    Seed seed;
    bool t;
};

// One tree step: expand, correct by cw when t is set, take the child for bit.
Node descend(const Node& node, const CorrectionWord& cw, bool bit) {
    PrgOutput exp = prg_expand(node.seed);
    if (node.t) {
        xor_seed(exp.left, cw.seed_cw);
        xor_seed(exp.right, cw.seed_cw);
        exp.t_left ^= cw.t_left;
        exp.t_right ^= cw.t_right;
    }
    return bit ? Node{exp.right, exp.t_right} : Node{exp.left, exp.t_left};
}

GroupVector leaf_share(uint8_t party, const Node& node, const GroupVector& final_cw,
                       const GroupVector& converted) {
    GroupVector out = converted;
    if (node.t) out.add_in_place(final_cw);
    return party == 1 ? group_neg(out) : out;
}

Seed random_seed_from_entropy() {
    // Key generation inside the protocol always supplies PRF-derived seeds;
    // this path backs the standalone API and CLI.
    static thread_local uint64_t counter = 0;
    std::random_device rd;
    Seed s;
    for (size_t i = 0; i < kSeedBytes; i += 4) {
        uint32_t v = rd();
        std::memcpy(s.bytes.data() + i, &v, 4);
    }
    uint64_t c = counter++;
    for (int i = 0; i < 8; ++i) s.bytes[i] ^= uint8_t(c >> (8 * i));
    return s;
}

}  // namespace

std::pair<DpfKey, DpfKey> dpf_gen(const DpfParams& params, uint64_t alpha, const GroupVector& beta,
                                  std::optional<std::pair<Seed, Seed>> seeds) {
    DpfParams::validate(params);
    if (alpha >= params.domain_size()) fail(Errc::domain, "alpha out of range");
    if (!(beta.params() == params.group)) fail(Errc::parameter, "beta group mismatch");

    Seed root0 = seeds ? seeds->first : random_seed_from_entropy();
    Seed root1 = seeds ? seeds->second : random_seed_from_entropy();

    Node n0{root0, false};
    Node n1{root1, true};
    std::vector<CorrectionWord> cws;
    cws.reserve(params.depth);

    for (uint32_t level = 0; level < params.depth; ++level) {
        const bool alpha_bit = (alpha >> (params.depth - 1 - level)) & 1;
        PrgOutput e0 = prg_expand(n0.seed);
        PrgOutput e1 = prg_expand(n1.seed);

        CorrectionWord cw;
        // The lose branch collapses to equal seeds; the keep branch keeps the
        // control bits complementary along the path to alpha.
        cw.seed_cw = alpha_bit ? e0.left : e0.right;
        xor_seed(cw.seed_cw, alpha_bit ? e1.left : e1.right);
        cw.t_left = e0.t_left ^ e1.t_left ^ alpha_bit ^ 1;
        cw.t_right = e0.t_right ^ e1.t_right ^ alpha_bit;

        Node next0 = alpha_bit ? Node{e0.right, e0.t_right} : Node{e0.left, e0.t_left};
        Node next1 = alpha_bit ? Node{e1.right, e1.t_right} : Node{e1.left, e1.t_left};
        const bool t_cw_keep = alpha_bit ? cw.t_right : cw.t_left;
        if (n0.t) {
            xor_seed(next0.seed, cw.seed_cw);
            next0.t ^= t_cw_keep;
        }
        if (n1.t) {
            xor_seed(next1.seed, cw.seed_cw);
            next1.t ^= t_cw_keep;
        }
        n0 = next0;
        n1 = next1;
        cws.push_back(cw);
    }

    GroupVector final_cw =
        group_sub(group_add(beta, convert_to_group(n1.seed, params.group)),
                  convert_to_group(n0.seed, params.group));
    if (n1.t) final_cw = group_neg(final_cw);

    DpfKey k0{0, root0, DpfPublicPart{cws, final_cw}, params};
    DpfKey k1{1, root1, DpfPublicPart{std::move(cws), std::move(final_cw)}, params};
    return {std::move(k0), std::move(k1)};
}

GroupVector dpf_eval(const DpfKey& key, uint64_t x) {
    if (x >= key.params.domain_size()) fail(Errc::domain, "x out of range");
    Node node{key.root_seed, key.party == 1};
    for (uint32_t level = 0; level < key.params.depth; ++level) {
        const bool bit = (x >> (key.params.depth - 1 - level)) & 1;
        node = descend(node, key.pub.cws[level], bit);
    }
    return leaf_share(key.party, node, key.pub.final_cw,
                      convert_to_group(node.seed, key.params.group));
}

std::vector<GroupVector> dpf_eval_full(const DpfKey& key) {
    if (key.params.depth > kFullEvalDepthLimit) fail(Errc::resource, "full evaluation depth guard");
    std::vector<GroupVector> out;
    out.reserve(key.params.domain_size());

    // Depth-first traversal with an explicit path stack; leaves come out in
    // ascending input order.
    struct Frame {
        Node node;
        uint32_t level;
    };
    std::vector<Frame> stack;
    stack.push_back({Node{key.root_seed, key.party == 1}, 0});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.level == key.params.depth) {
            out.push_back(leaf_share(key.party, f.node, key.pub.final_cw,
                                     convert_to_group(f.node.seed, key.params.group)));
            continue;
        }
        const CorrectionWord& cw = key.pub.cws[f.level];
        PrgOutput exp = prg_expand(f.node.seed);
        if (f.node.t) {
            xor_seed(exp.left, cw.seed_cw);
            xor_seed(exp.right, cw.seed_cw);
            exp.t_left ^= cw.t_left;
            exp.t_right ^= cw.t_right;
        }
        stack.push_back({Node{exp.right, exp.t_right}, f.level + 1});
        stack.push_back({Node{exp.left, exp.t_left}, f.level + 1});
    }
    return out;
}

size_t dpf_payload_bits(const DpfParams& params) {
    return kLambda + dpf_public_payload_bits(params);
}

size_t dpf_public_payload_bits(const DpfParams& params) {
    return size_t(params.depth) * (kLambda + 2) + params.group.element_bits();
}

size_t dpf_public_payload_bytes(const DpfParams& params) {
    return (dpf_public_payload_bits(params) + 7) / 8;
}

namespace {

void write_header(std::vector<uint8_t>& out, const char magic[4], const DpfParams& params,
                  uint8_t party) {
    out.insert(out.end(), magic, magic + 4);
    out.push_back(uint8_t(params.depth) | uint8_t(party << 7));
    out.push_back(uint8_t(params.group.l));
    put_u16be(out, uint16_t(params.group.tau));
}

void write_public_bits(BitWriter& w, const DpfPublicPart& pub, const DpfParams& params) {
    for (const auto& cw : pub.cws) {
        w.write_bytes(cw.seed_cw.bytes.data(), kSeedBytes);
        w.write_bit(cw.t_left);
        w.write_bit(cw.t_right);
    }
    for (uint32_t t = 0; t < params.group.tau; ++t)
        w.write_uint(pub.final_cw.elem(t), params.group.l);
}

DpfPublicPart read_public_bits(BitReader& r, const DpfParams& params) {
    DpfPublicPart pub;
    pub.cws.resize(params.depth);
    for (auto& cw : pub.cws) {
        r.read_bytes(cw.seed_cw.bytes.data(), kSeedBytes);
        cw.t_left = r.read_bit();
        cw.t_right = r.read_bit();
    }
    std::vector<u128> elems(params.group.tau);
    for (auto& e : elems) e = r.read_uint(params.group.l);
    pub.final_cw = GroupVector(params.group, std::move(elems));
    return pub;
}

DpfParams parse_header(const std::vector<uint8_t>& bytes, const char magic[4], uint8_t* party_out) {
    if (bytes.size() < 8) fail(Errc::format, "key bytes truncated");
    if (std::memcmp(bytes.data(), magic, 4) != 0) fail(Errc::format, "bad key magic");
    DpfParams params;
    params.depth = bytes[4] & 0x7f;
    if (party_out) *party_out = bytes[4] >> 7;
    params.group.l = bytes[5];
    params.group.tau = get_u16be(bytes.data() + 6);
    DpfParams::validate(params);
    return params;
}

}  // namespace

std::vector<uint8_t> dpf_serialize(const DpfKey& key) {
    std::vector<uint8_t> out;
    write_header(out, kMagicFull, key.params, key.party);
    BitWriter w;
    w.write_bytes(key.root_seed.bytes.data(), kSeedBytes);
    write_public_bits(w, key.pub, key.params);
    auto payload = w.take();
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

DpfKey dpf_deserialize(const std::vector<uint8_t>& bytes, std::optional<DpfParams> expected) {
    uint8_t party = 0;
    DpfParams params = parse_header(bytes, kMagicFull, &party);
    if (expected && !(params == *expected)) fail(Errc::format, "key parameters mismatch");
    const size_t need = 8 + (dpf_payload_bits(params) + 7) / 8;
    if (bytes.size() != need) fail(Errc::format, "key byte length mismatch");
    BitReader r(bytes.data() + 8, bytes.size() - 8);
    DpfKey key;
    key.party = party;
    key.params = params;
    r.read_bytes(key.root_seed.bytes.data(), kSeedBytes);
    key.pub = read_public_bits(r, params);
    return key;
}

std::vector<uint8_t> dpf_serialize_public(const DpfPublicPart& pub, const DpfParams& params) {
    std::vector<uint8_t> out;
    write_header(out, kMagicPublic, params, 0);
    dpf_write_public_payload(out, pub, params);
    return out;
}

DpfPublicPart dpf_deserialize_public(const std::vector<uint8_t>& bytes, const DpfParams& params) {
    DpfParams header_params = parse_header(bytes, kMagicPublic, nullptr);
    if (!(header_params == params)) fail(Errc::format, "public part parameters mismatch");
    const size_t need = 8 + dpf_public_payload_bytes(params);
    if (bytes.size() != need) fail(Errc::format, "public part byte length mismatch");
    return dpf_read_public_payload(bytes.data() + 8, bytes.size() - 8, params);
}

void dpf_write_public_payload(std::vector<uint8_t>& out, const DpfPublicPart& pub,
                              const DpfParams& params) {
    BitWriter w;
    write_public_bits(w, pub, params);
    auto payload = w.take();
    out.insert(out.end(), payload.begin(), payload.end());
}

DpfPublicPart dpf_read_public_payload(const uint8_t* data, size_t size, const DpfParams& params) {
    if (size < dpf_public_payload_bytes(params)) fail(Errc::format, "public payload truncated");
    BitReader r(data, size);
    return read_public_bits(r, params);
}

void dpf_append_public_bits(BitWriter& writer, const DpfPublicPart& pub, const DpfParams& params) {
    write_public_bits(writer, pub, params);
}

DpfPublicPart dpf_read_public_bits(BitReader& reader, const DpfParams& params) {
    return read_public_bits(reader, params);
}

DpfKey dpf_assemble(uint8_t party, const Seed& root_seed, DpfPublicPart pub,
                    const DpfParams& params) {
    DpfParams::validate(params);
    if (pub.cws.size() != params.depth) fail(Errc::parameter, "correction word count mismatch");
    return DpfKey{party, root_seed, std::move(pub), params};
}

}  // namespace fsl
