#include "fsl/batch_code.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace fsl {

uint64_t TableSpec::bins() const {
    return uint64_t(std::ceil(epsilon * double(k) - 1e-9));
}

void TableSpec::validate(const TableSpec& spec) {
    if (spec.m == 0) fail(Errc::parameter, "m must be positive");
    if (spec.k == 0 || spec.k > spec.m) fail(Errc::parameter, "k must be in [1, m]");
    if (spec.eta < 2 || spec.eta > 8) fail(Errc::parameter, "eta must be in [2, 8]");
    if (spec.epsilon <= 1.0) fail(Errc::parameter, "epsilon must exceed 1");
    if (spec.bins() < spec.k) fail(Errc::parameter, "bin count below k");
}

std::string TableSpec::canonical_text() const {
    char eps[32];
    std::snprintf(eps, sizeof(eps), "%.17g", epsilon);
    std::string out;
    out += "bins=" + std::to_string(bins()) + "\n";
    out += "epsilon=" + std::string(eps) + "\n";
    out += "eta=" + std::to_string(eta) + "\n";
    out += "hash_seed=" + hash_seed.hex() + "\n";
    out += "k=" + std::to_string(k) + "\n";
    out += "kappa=" + std::to_string(kappa) + "\n";
    out += "m=" + std::to_string(m) + "\n";
    out += "sigma=" + std::to_string(sigma) + "\n";
    return out;
}

std::vector<uint64_t> hash_all(const TableSpec& spec, uint64_t element) {
    const auto block = element_hash_block(spec.hash_seed, element);
    const uint64_t b = spec.bins();
    std::vector<uint64_t> out(spec.eta);
    for (uint32_t d = 0; d < spec.eta; ++d) {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(block[8 * d + i]) << (8 * i);
        out[d] = v % b;
    }
    return out;
}

std::vector<uint64_t> candidate_bins(const TableSpec& spec, uint64_t element) {
    auto bins = hash_all(spec, element);
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    return bins;
}

SimpleTable build_simple_table(const TableSpec& spec, const std::vector<uint64_t>& domain) {
    TableSpec::validate(spec);
    if (domain.empty()) fail(Errc::parameter, "empty domain");
    for (size_t i = 1; i < domain.size(); ++i)
        if (domain[i] <= domain[i - 1]) fail(Errc::parameter, "domain must be strictly increasing");

    SimpleTable table;
    table.spec = spec;
    table.bins.resize(spec.bins());
    for (uint64_t element : domain)
        for (uint64_t bin : candidate_bins(spec, element)) table.bins[bin].push_back(element);
    // Ascending domain iteration keeps each bin sorted; the order fixes pos_j
    // for every party.
    for (const auto& bin : table.bins)
        table.theta = std::max(table.theta, uint64_t(bin.size()));
    table.depth = std::max(uint32_t(1), ceil_log2(table.theta));
    return table;
}

uint64_t lookup_position(const SimpleTable& simple, uint64_t bin, uint64_t element) {
    if (bin >= simple.bins.size()) fail(Errc::lookup, "bin index out of range");
    const auto& list = simple.bins[bin];
    auto it = std::lower_bound(list.begin(), list.end(), element);
    if (it == list.end() || *it != element) fail(Errc::lookup, "element not present in bin");
    return uint64_t(it - list.begin());
}

namespace {

// Shortest eviction chain via BFS over bins: an edge goes from an occupied
// bin to each candidate bin of its occupant. Finds a placement whenever one
// exists, so the stash only ever holds true overflows.
bool place_by_augmenting_path(CuckooTable& table, const TableSpec& spec, uint64_t element) {
    const uint64_t b = spec.bins();
    std::vector<int64_t> parent(b, -2);  // -2 unvisited, -1 BFS root
    std::vector<uint64_t> queue;
    for (uint64_t bin : hash_all(spec, element)) {
        if (parent[bin] == -2) {
            parent[bin] = -1;
            queue.push_back(bin);
        }
    }
    int64_t free_bin = -1;
    for (size_t head = 0; head < queue.size() && free_bin < 0; ++head) {
        const uint64_t bin = queue[head];
        if (!table.slots[bin]) {
            free_bin = int64_t(bin);
            break;
        }
        for (uint64_t next : hash_all(spec, *table.slots[bin])) {
            if (parent[next] == -2) {
                parent[next] = int64_t(bin);
                queue.push_back(next);
            }
        }
    }
    if (free_bin < 0) return false;
    int64_t bin = free_bin;
    while (parent[bin] >= 0) {
        const int64_t prev = parent[bin];
        table.slots[bin] = table.slots[prev];
        ++table.relocations;
        bin = prev;
    }
    table.slots[bin] = element;
    return true;
}

}  // namespace

CuckooTable build_cuckoo_table(const TableSpec& spec, const std::vector<uint64_t>& selection) {
    TableSpec::validate(spec);
    if (selection.size() > spec.k) fail(Errc::parameter, "selection exceeds k");

    CuckooTable table;
    table.spec = spec;
    table.slots.assign(spec.bins(), std::nullopt);

    // Eviction choices come from a generator derived from the public hash
    // seed, so identical inputs rebuild identical tables everywhere.
    std::mt19937_64 rng(seed_to_u64(prf_derive(spec.hash_seed, 0x6b636f63756b6f6fULL)));

    for (uint64_t element : selection) {
        uint64_t current = element;
        bool placed = false;
        for (uint64_t attempt = 0; attempt <= kCuckooRelocationCap; ++attempt) {
            auto bins = hash_all(spec, current);
            for (uint64_t bin : bins) {
                if (!table.slots[bin]) {
                    table.slots[bin] = current;
                    placed = true;
                    break;
                }
            }
            if (placed) break;
            const uint64_t victim_bin = bins[rng() % bins.size()];
            std::swap(current, *table.slots[victim_bin]);
            ++table.relocations;
        }
        // The walk can miss a feasible placement on small tables; the
        // deterministic search settles whether one exists at all.
        if (!placed) placed = place_by_augmenting_path(table, spec, current);
        if (!placed) {
            if (table.stash.size() < spec.sigma) {
                table.stash.push_back(current);
            } else {
                fail(Errc::cuckoo_overflow, "cuckoo insertion failed beyond stash capacity");
            }
        }
    }
    return table;
}

namespace {

// Reference bin-size grid: rows by compression rate, columns by index-space
// size (log2 m in {10, 15, 20, 25}).
constexpr double kThetaRates[5] = {0.01, 0.10, 0.30, 0.50, 0.70};
constexpr double kThetaGrid[5][4] = {
    {324, 315, 336, 366},
    {45, 54, 66, 78},
    {27, 36, 39, 48},
    {21, 24, 30, 36},
    {18, 21, 27, 30},
};
constexpr double kThetaLogM[4] = {10, 15, 20, 25};

double interp(double x, double x0, double x1, double y0, double y1) {
    if (x1 == x0) return y0;
    const double t = (x - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

double theta_from_grid(double log_m, double c) {
    log_m = std::clamp(log_m, kThetaLogM[0], kThetaLogM[3]);
    c = std::clamp(c, kThetaRates[0], kThetaRates[4]);
    size_t col = 0;
    while (col < 2 && log_m > kThetaLogM[col + 1]) ++col;
    size_t row = 0;
    while (row < 3 && c > kThetaRates[row + 1]) ++row;
    const double left = interp(c, kThetaRates[row], kThetaRates[row + 1], kThetaGrid[row][col],
                               kThetaGrid[row + 1][col]);
    const double right = interp(c, kThetaRates[row], kThetaRates[row + 1], kThetaGrid[row][col + 1],
                                kThetaGrid[row + 1][col + 1]);
    return interp(log_m, kThetaLogM[col], kThetaLogM[col + 1], left, right);
}

}  // namespace

ParamRecommendation recommend_params(uint64_t m, uint64_t k) {
    if (k == 0 || k > m) fail(Errc::parameter, "k must be in [1, m]");
    ParamRecommendation rec{};
    if (k <= (uint64_t(1) << 15)) {
        rec.epsilon = 1.25;
    } else if (k <= (uint64_t(1) << 20)) {
        rec.epsilon = 1.27;
    } else {
        rec.epsilon = 1.28;
    }
    const double c = double(k) / double(m);
    rec.theta_estimate = theta_from_grid(std::log2(double(m)), c);
    rec.depth = std::max(uint32_t(1), ceil_log2(uint64_t(std::ceil(rec.theta_estimate))));
    if (c >= 0.01 && m <= (uint64_t(1) << 25)) rec.depth = std::min(rec.depth, uint32_t(9));
    return rec;
}

}  // namespace fsl
