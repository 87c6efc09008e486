#pragma once

#include <random>
#include <string>
#include <vector>

#include "fsl/analytics.hpp"
#include "fsl/protocol.hpp"

namespace fsl {

// Deterministic in-process simulation of one federated submodel learning
// round: n clients, two servers, three channel classes (client<->S0,
// client<->S1, S0<->S1) with byte accounting, checked against a plaintext
// oracle that never touches DPF or hashing code.

struct Scenario {
    uint64_t m = 0;  // logical model size (elements of tau*l bits each)
    uint64_t k = 0;  // per-client selection capacity
    std::vector<uint64_t> k_list;  // optional per-client selection sizes (<= k)
    uint32_t n = 0;
    uint32_t l = 128;
    uint32_t tau = 1;
    double epsilon = 0;  // 0 = bracket default by k
    uint32_t eta = 3;
    uint32_t sigma = 0;
    Mode mode = Mode::full_domain;
    uint64_t union_size = 0;  // union mode only
    uint64_t rounds = 1;
    uint64_t rng_seed = 1;

    double effective_epsilon() const;
    static void validate(const Scenario& s);

    // key = value text, one field per line, '#' comments.
    static Scenario parse(const std::string& text);
    std::string to_text() const;
};

struct MessageRecord {
    std::string sender;    // "C<i>", "S0" or "S1"
    std::string receiver;
    uint8_t role = 0;
    uint64_t round = 0;
    size_t header_bytes = 0;
    size_t payload_bytes = 0;
};

struct RoundTiming {
    uint64_t round = 0;
    double gen_ms = 0;
    double eval_ms = 0;
    double agg_ms = 0;
};

struct RoundTranscript {
    Scenario scenario;
    std::vector<MessageRecord> messages;
    std::vector<RoundTiming> timings;
    std::vector<GroupVector> final_w;  // SSA: final model; PSR: the served weights
    bool oracle_match = false;
    uint64_t theta = 0;
    uint32_t bin_depth = 0;
    double client0_upload_bits_round0 = 0;  // payload bits, headers excluded

    std::string messages_csv() const;
    // Everything deterministic about the run (no timings); byte-identical
    // across runs of the same scenario.
    std::string deterministic_text() const;
    std::string summary_text() const;
};

// The ideal aggregation functionality: scatter-add every client's sparse
// update into w_prev. Pure array arithmetic by construction.
std::vector<GroupVector> plaintext_aggregate(const std::vector<GroupVector>& w_prev,
                                             const std::vector<std::vector<uint64_t>>& selections,
                                             const std::vector<std::vector<GroupVector>>& updates);

RoundTranscript run_round(const Scenario& scenario);
RoundTranscript run_psr(const Scenario& scenario);

std::string bench_sweep(const std::vector<Scenario>& grid);

// Scenario-seeded generator; every random draw of a run comes from here in a
// fixed order.
class HarnessRng {
public:
    explicit HarnessRng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }
    uint64_t below(uint64_t n) { return gen_() % n; }
    Seed seed();
    GroupVector group_vector(GroupParams params);
    // `count` distinct values below `universe`, ascending.
    std::vector<uint64_t> distinct(uint64_t count, uint64_t universe);

private:
    std::mt19937_64 gen_;
};

}  // namespace fsl
