#pragma once

#include <cstdint>
#include <vector>

#include "fsl/common.hpp"

namespace fsl {

// Base group Z_{2^l} with wrap-around addition; logical elements are
// tau-wide vectors of it ("mega-elements"), so one logical value carries
// L = tau*l bits.
struct GroupParams {
    uint32_t l = 128;  // bit width, one of {32, 64, 128}
    uint32_t tau = 1;  // base elements per logical element

    uint32_t element_bits() const { return tau * l; }
    uint32_t element_bytes() const { return tau * (l / 8); }

    bool operator==(const GroupParams&) const = default;

    static void validate(const GroupParams& p) {
        if (p.l != 32 && p.l != 64 && p.l != 128) fail(Errc::parameter, "l must be 32, 64 or 128");
        if (p.tau < 1) fail(Errc::parameter, "tau must be >= 1");
    }
};

inline u128 group_mask(uint32_t l) {
    return l == 128 ? ~u128(0) : (u128(1) << l) - 1;
}

class GroupVector {
public:
    GroupVector() = default;
    explicit GroupVector(GroupParams params) : params_(params), elems_(params.tau, 0) {
        GroupParams::validate(params);
    }
    GroupVector(GroupParams params, std::vector<u128> elems) : params_(params), elems_(std::move(elems)) {
        GroupParams::validate(params);
        if (elems_.size() != params_.tau) fail(Errc::parameter, "element count != tau");
        for (auto& e : elems_) e &= group_mask(params_.l);
    }

    const GroupParams& params() const { return params_; }
    const std::vector<u128>& elems() const { return elems_; }
    u128 elem(size_t i) const { return elems_.at(i); }
    void set_elem(size_t i, u128 v) { elems_.at(i) = v & group_mask(params_.l); }

    bool is_zero() const {
        for (auto e : elems_)
            if (e != 0) return false;
        return true;
    }

    GroupVector& add_in_place(const GroupVector& other) {
        check_same_params(other);
        const u128 mask = group_mask(params_.l);
        for (size_t i = 0; i < elems_.size(); ++i) elems_[i] = (elems_[i] + other.elems_[i]) & mask;
        return *this;
    }

    bool operator==(const GroupVector& other) const {
        return params_ == other.params_ && elems_ == other.elems_;
    }

    // Serializes as tau big-endian chunks of l/8 bytes each.
    std::vector<uint8_t> to_bytes() const;
    static GroupVector from_bytes(GroupParams params, const uint8_t* data, size_t size);

private:
    void check_same_params(const GroupVector& other) const {
        if (!(params_ == other.params_)) fail(Errc::parameter, "mismatched group parameters");
    }

    GroupParams params_{};
    std::vector<u128> elems_;
};

GroupVector group_add(const GroupVector& a, const GroupVector& b);
GroupVector group_neg(const GroupVector& a);
GroupVector group_sub(const GroupVector& a, const GroupVector& b);
// Component-wise product with a scalar from the base group (ring Z_{2^l}).
GroupVector group_scale(const GroupVector& a, u128 scalar);
GroupVector group_zero(GroupParams params);

}  // namespace fsl
