#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsl/crypto.hpp"

namespace fsl {

// Probabilistic batch code: the client packs its k selections into B bins by
// cuckoo hashing while every party packs the whole index space into the same
// B bins by simple hashing with the same hash functions. A cuckoo slot's
// element then always appears in the matching simple bin, which turns
// multi-query retrieval into one single-query instance per bin.

struct TableSpec {
    uint64_t m = 0;           // active index-space size (full model or union)
    uint64_t k = 0;           // client selection capacity
    double epsilon = 1.25;    // bin scale factor
    uint32_t eta = 3;         // hash function count, 2..8
    uint32_t sigma = 0;       // stash capacity
    Seed hash_seed{};         // public; all eta hash functions derive from it
    uint32_t kappa = 40;      // statistical failure exponent target

    uint64_t bins() const;    // B = ceil(epsilon * k)

    // Canonical sorted key=value text, so parties can hash-compare setups.
    std::string canonical_text() const;

    static void validate(const TableSpec& spec);
};

// h_1..h_eta for one element; duplicates possible, order fixed by d.
std::vector<uint64_t> hash_all(const TableSpec& spec, uint64_t element);

// Deduplicated candidate bins, ascending.
std::vector<uint64_t> candidate_bins(const TableSpec& spec, uint64_t element);

struct SimpleTable {
    TableSpec spec;
    std::vector<std::vector<uint64_t>> bins;  // each sorted ascending
    uint64_t theta = 0;                       // max bin size
    uint32_t depth = 1;                       // max(1, ceil(log2 theta))
};

// Inserts every domain index into each of its distinct candidate bins.
// The domain is either {0..m-1} or a public union subset.
SimpleTable build_simple_table(const TableSpec& spec, const std::vector<uint64_t>& domain);

// 0-based rank of element within the bin's ascending order.
uint64_t lookup_position(const SimpleTable& simple, uint64_t bin, uint64_t element);

struct CuckooTable {
    TableSpec spec;
    std::vector<std::optional<uint64_t>> slots;  // B entries
    std::vector<uint64_t> stash;                 // up to sigma overflow entries
    uint64_t relocations = 0;                    // total evictions during build
};

// Random-walk insertion with a relocation cap, overflow to the stash.
// Throws Errc::cuckoo_overflow when an element fits neither table nor stash.
inline constexpr uint64_t kCuckooRelocationCap = 500;
CuckooTable build_cuckoo_table(const TableSpec& spec, const std::vector<uint64_t>& selection);

struct ParamRecommendation {
    double epsilon;
    double theta_estimate;
    uint32_t depth;
};

// Scale factor by selection-size bracket and bin-size estimate from the
// reference measurement grid, depth capped at 9 in the covered regime.
ParamRecommendation recommend_params(uint64_t m, uint64_t k);

}  // namespace fsl
