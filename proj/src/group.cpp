#include "fsl/group.hpp"

namespace fsl {

std::vector<uint8_t> GroupVector::to_bytes() const {
    std::vector<uint8_t> out;
    out.reserve(params_.element_bytes());
    const uint32_t nbytes = params_.l / 8;
    for (auto e : elems_)
        for (int i = int(nbytes) - 1; i >= 0; --i) out.push_back(uint8_t(e >> (8 * i)));
    return out;
}

GroupVector GroupVector::from_bytes(GroupParams params, const uint8_t* data, size_t size) {
    GroupParams::validate(params);
    if (size != params.element_bytes()) fail(Errc::format, "group vector byte length mismatch");
    const uint32_t nbytes = params.l / 8;
    std::vector<u128> elems(params.tau, 0);
    for (uint32_t t = 0; t < params.tau; ++t) {
        u128 v = 0;
        for (uint32_t i = 0; i < nbytes; ++i) v = v << 8 | data[t * nbytes + i];
        elems[t] = v;
    }
    return GroupVector(params, std::move(elems));
}

GroupVector group_add(const GroupVector& a, const GroupVector& b) {
    GroupVector out = a;
    out.add_in_place(b);
    return out;
}

GroupVector group_neg(const GroupVector& a) {
    const u128 mask = group_mask(a.params().l);
    std::vector<u128> elems(a.params().tau);
    for (size_t i = 0; i < elems.size(); ++i) elems[i] = (~a.elems()[i] + 1) & mask;
    return GroupVector(a.params(), std::move(elems));
}

GroupVector group_sub(const GroupVector& a, const GroupVector& b) {
    return group_add(a, group_neg(b));
}

GroupVector group_scale(const GroupVector& a, u128 scalar) {
    const u128 mask = group_mask(a.params().l);
    std::vector<u128> elems(a.params().tau);
    for (size_t i = 0; i < elems.size(); ++i) elems[i] = (a.elems()[i] * scalar) & mask;
    return GroupVector(a.params(), std::move(elems));
}

GroupVector group_zero(GroupParams params) { return GroupVector(params); }

}  // namespace fsl
