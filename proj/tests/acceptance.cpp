// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <unordered_set>

#include "fsl/analytics.hpp"
#include "fsl/batch_code.hpp"
#include "fsl/harness.hpp"
#include "fsl/protocol.hpp"
#include "fsl/udpf.hpp"

using namespace fsl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Seed random_seed(std::mt19937_64& rng) {
    Seed s;
    for (size_t i = 0; i < kSeedBytes; i += 8) {
        uint64_t v = rng();
        for (size_t j = 0; j < 8; ++j) s.bytes[i + j] = uint8_t(v >> (8 * j));
    }
    return s;
}

GroupVector random_vector(std::mt19937_64& rng, GroupParams params) {
    std::vector<u128> elems(params.tau);
    for (auto& e : elems) {
        u128 v = rng();
        if (params.l == 128) v = v << 64 | rng();
        e = v & group_mask(params.l);
    }
    return GroupVector(params, std::move(elems));
}

struct Suite {
    bool all_ok = true;
    void report(int criterion, bool ok, const std::string& detail) {
        std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
        all_ok = all_ok && ok;
    }
};

// 1. Reconstruction equals the point function, and full-domain evaluation
// equals pointwise evaluation, depths 1..8, 50 draws each.
bool criterion_dpf_oracle(std::string& detail) {
    auto start = Clock::now();
    std::mt19937_64 rng(1001);
    for (uint32_t depth = 1; depth <= 8; ++depth) {
        const DpfParams params{depth, GroupParams{128, 1}};
        for (int trial = 0; trial < 50; ++trial) {
            const uint64_t alpha = rng() % params.domain_size();
            const GroupVector beta = random_vector(rng, params.group);
            auto [k0, k1] =
                dpf_gen(params, alpha, beta, std::make_pair(random_seed(rng), random_seed(rng)));
            auto full0 = dpf_eval_full(k0);
            auto full1 = dpf_eval_full(k1);
            for (uint64_t x = 0; x < params.domain_size(); ++x) {
                const GroupVector sum = group_add(full0[x], full1[x]);
                if (x == alpha ? !(sum == beta) : !sum.is_zero()) {
                    detail = "reconstruction mismatch";
                    return false;
                }
                if (!(full0[x] == dpf_eval(k0, x)) || !(full1[x] == dpf_eval(k1, x))) {
                    detail = "full-domain evaluation disagrees with pointwise";
                    return false;
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "dpf oracle equivalence, depths 1..8 x50 (%.1f s < 30 s)",
                  elapsed);
    detail = buf;
    return elapsed < 30.0;
}

// 2. Key payload is exactly n(lambda+2)+lambda+tau*l bits at the reference
// parameters.
bool criterion_key_size(std::string& detail) {
    const DpfParams params{9, GroupParams{128, 1}};
    std::mt19937_64 rng(1002);
    auto [k0, k1] = dpf_gen(params, 300, random_vector(rng, params.group),
                            std::make_pair(random_seed(rng), random_seed(rng)));
    const bool bits_ok = dpf_payload_bits(params) == 1426;
    const bool file_ok = dpf_serialize(k0).size() == 8 + (1426 + 7) / 8;
    const bool pub_ok = dpf_public_payload_bits(params) == 1298;
    detail = "key payload 1426 bits (depth 9, lambda = l = 128, tau = 1)";
    return bits_ok && file_ok && pub_ok;
}

// 3. Ten-epoch update chains reconstruct the current beta exhaustively;
// hint payload is exactly tau*l bits per key.
bool criterion_udpf_chains(std::string& detail) {
    std::mt19937_64 rng(1003);
    for (uint32_t depth = 1; depth <= 8; ++depth) {
        const DpfParams params{depth, GroupParams{64, 1}};
        const uint64_t alpha = rng() % params.domain_size();
        GroupVector beta = random_vector(rng, params.group);
        auto gen = udpf_gen(params, alpha, beta,
                            std::make_pair(random_seed(rng), random_seed(rng)));
        for (uint64_t epoch = 0; epoch <= 10; ++epoch) {
            if (epoch > 0) {
                beta = random_vector(rng, params.group);
                Hint hint = udpf_next(gen.trapdoor, beta, epoch);
                if (hint_serialize(hint).size() != 16 + params.group.element_bytes()) {
                    detail = "hint payload is not tau*l bits per key";
                    return false;
                }
                gen.key0 = udpf_update(gen.key0, hint);
                gen.key1 = udpf_update(gen.key1, hint);
            }
            for (uint64_t x = 0; x < params.domain_size(); ++x) {
                const GroupVector sum = group_add(udpf_eval(gen.key0, x), udpf_eval(gen.key1, x));
                if (x == alpha ? !(sum == beta) : !sum.is_zero()) {
                    detail = "epoch chain reconstruction mismatch";
                    return false;
                }
            }
        }
    }
    detail = "updatable key chains, 10 epochs, depths 1..8, hint = tau*l bits";
    return true;
}

Scenario sweep_scenario(int i) {
    Scenario s;
    s.l = 64;
    s.tau = (i % 2) ? 3 : 1;
    s.m = uint64_t(64) << (i % 3);
    s.k = std::vector<uint64_t>{8, 12, 16, 24, 32}[i % 5];
    s.n = uint32_t(1 + (i % 5));
    s.rng_seed = 9000 + uint64_t(i);
    switch (i % 3) {
        case 0: s.mode = Mode::full_domain; break;
        case 1:
            s.mode = Mode::union_restricted;
            s.union_size = s.m / 2;
            break;
        case 2:
            s.mode = Mode::udpf_fixed;
            s.rounds = 3;
            break;
    }
    if (i % 5 == 4) {  // force stash use
        s.m = 256;
        s.k = 64;
        s.epsilon = 1.005;
        s.sigma = 24;
        if (s.mode == Mode::union_restricted) s.union_size = 128;
    }
    return s;
}

// 4. One hundred randomized rounds match the plaintext oracle exactly.
bool criterion_ssa_lossless(std::string& detail) {
    auto start = Clock::now();
    int stash_runs = 0;
    for (int i = 0; i < 100; ++i) {
        Scenario s = sweep_scenario(i);
        RoundTranscript t = run_round(s);
        if (!t.oracle_match) {
            detail = "oracle mismatch in sweep instance " + std::to_string(i);
            return false;
        }
        stash_runs += s.sigma > 0;
    }
    const double elapsed = seconds_since(start);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "ssa lossless on 100 rounds (%d stash-forced, %.1f s < 120 s)", stash_runs,
                  elapsed);
    detail = buf;
    return elapsed < 120.0;
}

// 5. Retrieval equals direct lookup on the same grid.
bool criterion_psr_exact(std::string& detail) {
    for (int i = 0; i < 100; ++i) {
        Scenario s = sweep_scenario(i);
        if (s.mode == Mode::udpf_fixed) {
            s.mode = Mode::full_domain;
            s.union_size = 0;
        }
        s.rounds = 1;
        s.rng_seed += 5000;
        RoundTranscript t = run_psr(s);
        if (!t.oracle_match) {
            detail = "retrieval mismatch in sweep instance " + std::to_string(i);
            return false;
        }
    }
    detail = "psr equals direct lookup on 100 instances";
    return true;
}

// 6. Measured upload within 1% of the closed form; published table cells
// reproduced within 2% or one printed digit.
bool criterion_accounting(std::string& detail) {
    Scenario s;
    s.m = uint64_t(1) << 13;
    s.k = 1024;
    s.n = 1;
    s.l = 128;
    s.rng_seed = 1006;
    RoundTranscript t = run_round(s);
    if (!t.oracle_match) {
        detail = "accounting scenario failed its oracle";
        return false;
    }
    CostModel model;
    model.m = double(s.m);
    model.k = double(s.k);
    model.epsilon = s.effective_epsilon();
    model.depth = t.bin_depth;
    auto rec = reconcile(model, t.client0_upload_bits_round0, false);

    struct Cell {
        double log2m, c, mib, last_digit;
        bool baseline;
    };
    const Cell cells[] = {
        {15, 0.01, 0.063, 0.001, false}, {20, 0.10, 20.28, 0.01, false},
        {10, 1.0, 0.015, 0.001, true},   {15, 1.0, 0.5, 0.1, true},
        {20, 1.0, 16.0, 1.0, true},
    };
    bool cells_ok = true;
    for (const auto& cell : cells) {
        CostModel cm;
        cm.m = std::pow(2.0, cell.log2m);
        cm.k = cm.m * cell.c;
        const double bits = cell.baseline ? trivial_upload_bits(cm) : basic_upload_bits(cm);
        const double mib = bits / 8.0 / double(1 << 20);
        cells_ok = cells_ok &&
                   std::fabs(mib - cell.mib) <= std::max(0.02 * cell.mib, cell.last_digit);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "upload accounting: measured within %.3f%% of formula; table cells %s",
                  rec.deviation * 100, cells_ok ? "reproduced" : "WRONG");
    detail = buf;
    return rec.pass && cells_ok;
}

// 7. Rate constants from the closed forms.
bool criterion_rate_constants(std::string& detail) {
    CostModel model;
    model.m = double(uint64_t(1) << 20);
    model.k = model.m * 0.01;
    const double coeff = rate_coefficient(model);
    const double threshold = rate_basic(model).threshold_c;
    CostModel mega = model;
    mega.tau = 18;
    const double mega_threshold = rate_basic(mega).threshold_c;
    const auto udpf = rate_udpf(model, 2);

    const bool ok = std::fabs(coeff - 12.68) < 0.01 && threshold >= 0.078 &&
                    threshold <= 0.079 && mega_threshold >= 0.530 && mega_threshold <= 0.532 &&
                    udpf.nominal.rate == model.c();
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "rate constants: coeff %.4f, threshold %.2f%%, tau=18 %.2f%%, "
                  "update-round rate = c",
                  coeff, threshold * 100, mega_threshold * 100);
    detail = buf;
    return ok;
}

// 8. Cuckoo behavior: zero failures at the reference scale factor, and
// measured max bin sizes against the published grid. The grid reports the
// bin size to provision for, so the estimator is the worst theta over 10^3
// pinned hash draws per cell.
bool criterion_cuckoo(std::string& detail) {
    std::mt19937_64 rng(1008);
    TableSpec spec;
    spec.m = uint64_t(1) << 20;
    spec.k = 1024;
    spec.epsilon = 1.25;
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        spec.hash_seed = random_seed(rng);
        std::unordered_set<uint64_t> seen;
        std::vector<uint64_t> sel;
        while (sel.size() < spec.k) {
            uint64_t v = rng() % spec.m;
            if (seen.insert(v).second) sel.push_back(v);
        }
        std::sort(sel.begin(), sel.end());
        try {
            build_cuckoo_table(spec, sel);
        } catch (const Error&) {
            ++failures;
        }
    }

    const double rates[4] = {0.10, 0.30, 0.50, 0.70};
    const double reference[4] = {45, 27, 21, 18};
    const Seed master{};  // canonical trial derivation
    std::vector<uint64_t> domain(1 << 10);
    for (uint64_t i = 0; i < domain.size(); ++i) domain[i] = i;
    bool theta_ok = true;
    std::string theta_report;
    for (int r = 0; r < 4; ++r) {
        TableSpec cell;
        cell.m = 1 << 10;
        cell.k = uint64_t(rates[r] * (1 << 10));
        cell.epsilon = 1.25;
        uint64_t measured = 0;
        for (uint64_t trial = 0; trial < 1000; ++trial) {
            cell.hash_seed = prf_derive(master, uint64_t(r) * 1000 + trial);
            measured = std::max(measured, build_simple_table(cell, domain).theta);
        }
        const bool in_band = double(measured) >= 0.75 * reference[r] &&
                             double(measured) <= 1.25 * reference[r];
        theta_ok = theta_ok && in_band;
        char cell_buf[64];
        std::snprintf(cell_buf, sizeof(cell_buf), " [c=%.0f%%: %llu vs %.0f%s]", rates[r] * 100,
                      (unsigned long long)measured, reference[r], in_band ? "" : " OUT");
        theta_report += cell_buf;
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf), "cuckoo: %d/1000 insertion failures; theta%s", failures,
                  theta_report.c_str());
    detail = buf;
    return failures == 0 && theta_ok;
}

// 9. Desk-scale performance bounds (machine sanity, not a published match).
bool criterion_performance(std::string& detail) {
    Scenario s;
    s.m = uint64_t(1) << 15;
    s.k = 3277;  // c = 10%
    s.n = 1;
    s.l = 128;
    s.rng_seed = 1009;
    auto start = Clock::now();
    RoundTranscript t = run_round(s);
    const double round_s = seconds_since(start);
    if (!t.oracle_match) {
        detail = "large round failed its oracle";
        return false;
    }

    std::mt19937_64 rng(1010);
    const DpfParams deep{16, GroupParams{128, 1}};
    auto [k0, k1] = dpf_gen(deep, 12345, random_vector(rng, deep.group),
                            std::make_pair(random_seed(rng), random_seed(rng)));
    start = Clock::now();
    auto full = dpf_eval_full(k0);
    const double eval_s = seconds_since(start);

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "m=2^15 c=10%% round %.1f s (< 60); depth-16 full eval %.3f s (< 1)", round_s,
                  eval_s);
    detail = buf;
    return round_s < 60.0 && eval_s < 1.0 && full.size() == (uint64_t(1) << 16);
}

// 10. Identical scenario and seed give byte-identical transcripts.
bool criterion_determinism(std::string& detail) {
    Scenario s;
    s.m = 256;
    s.k = 16;
    s.n = 3;
    s.l = 64;
    s.mode = Mode::udpf_fixed;
    s.rounds = 2;
    s.rng_seed = 77;
    const std::string a = run_round(s).deterministic_text();
    const std::string b = run_round(s).deterministic_text();
    Scenario p = s;
    p.mode = Mode::full_domain;
    p.rounds = 1;
    const std::string pa = run_psr(p).deterministic_text();
    const std::string pb = run_psr(p).deterministic_text();
    detail = "byte-identical transcripts across repeated runs";
    return a == b && pa == pb;
}

}  // namespace

int main() {
    Suite suite;
    std::string detail;

    bool ok = criterion_dpf_oracle(detail);
    suite.report(1, ok, detail);
    ok = criterion_key_size(detail);
    suite.report(2, ok, detail);
    ok = criterion_udpf_chains(detail);
    suite.report(3, ok, detail);
    ok = criterion_ssa_lossless(detail);
    suite.report(4, ok, detail);
    ok = criterion_psr_exact(detail);
    suite.report(5, ok, detail);
    ok = criterion_accounting(detail);
    suite.report(6, ok, detail);
    ok = criterion_rate_constants(detail);
    suite.report(7, ok, detail);
    ok = criterion_cuckoo(detail);
    suite.report(8, ok, detail);
    ok = criterion_performance(detail);
    suite.report(9, ok, detail);
    ok = criterion_determinism(detail);
    suite.report(10, ok, detail);

    std::printf("%s\n", suite.all_ok ? "acceptance: all criteria passed"
                                     : "acceptance: FAILURES present");
    return suite.all_ok ? 0 : 1;
}
