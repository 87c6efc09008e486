#include "fsl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace fsl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::full_domain: return "full_domain";
        case Mode::union_restricted: return "union_restricted";
        case Mode::udpf_fixed: return "udpf_fixed";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    if (name == "full_domain") return Mode::full_domain;
    if (name == "union_restricted") return Mode::union_restricted;
    if (name == "udpf_fixed") return Mode::udpf_fixed;
    fail(Errc::parameter, "unknown mode: " + name);
}

}  // namespace

double Scenario::effective_epsilon() const {
    if (epsilon > 0) return epsilon;
    // The reference scale factors are validated from k = 2^10 upward; tiny
    // tables need more slack to keep hash failures out of desk-scale runs.
    if (k < (uint64_t(1) << 10)) return 2.0;
    if (k <= (uint64_t(1) << 15)) return 1.25;
    if (k <= (uint64_t(1) << 20)) return 1.27;
    return 1.28;
}

void Scenario::validate(const Scenario& s) {
    if (s.m == 0 || s.k == 0) fail(Errc::parameter, "scenario requires m and k");
    if (s.k > s.m) fail(Errc::parameter, "k must not exceed m");
    if (s.l != 32 && s.l != 64 && s.l != 128) fail(Errc::parameter, "l must be 32, 64 or 128");
    if (s.tau < 1) fail(Errc::parameter, "tau must be >= 1");
    if (s.rounds < 1) fail(Errc::parameter, "rounds must be >= 1");
    if (s.mode == Mode::union_restricted) {
        if (s.union_size < s.k || s.union_size > s.m)
            fail(Errc::parameter, "union_size must be in [k, m]");
    } else if (s.union_size != 0) {
        fail(Errc::parameter, "union_size only applies to union_restricted mode");
    }
    if (!s.k_list.empty()) {
        if (s.k_list.size() != s.n) fail(Errc::parameter, "k_list length must equal n");
        for (auto v : s.k_list)
            if (v > s.k) fail(Errc::parameter, "k_list entries must not exceed k");
    }
}

Scenario Scenario::parse(const std::string& text) {
    Scenario s;
    bool any = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(Errc::parameter, "scenario line missing '=': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        any = true;
        if (key == "m") s.m = std::stoull(value);
        else if (key == "k") s.k = std::stoull(value);
        else if (key == "k_list") {
            s.k_list.clear();
            std::istringstream vv(value);
            std::string item;
            while (std::getline(vv, item, ',')) s.k_list.push_back(std::stoull(trim(item)));
        }
        else if (key == "n") s.n = uint32_t(std::stoul(value));
        else if (key == "l") s.l = uint32_t(std::stoul(value));
        else if (key == "tau") s.tau = uint32_t(std::stoul(value));
        else if (key == "epsilon") s.epsilon = std::stod(value);
        else if (key == "eta") s.eta = uint32_t(std::stoul(value));
        else if (key == "sigma") s.sigma = uint32_t(std::stoul(value));
        else if (key == "mode") s.mode = mode_from_name(value);
        else if (key == "union_size") s.union_size = std::stoull(value);
        else if (key == "rounds") s.rounds = std::stoull(value);
        else if (key == "rng_seed") s.rng_seed = std::stoull(value);
        else fail(Errc::parameter, "unknown scenario key: " + key);
    }
    if (!any) fail(Errc::parameter, "empty scenario");
    validate(s);
    return s;
}

std::string Scenario::to_text() const {
    std::ostringstream out;
    out << "m = " << m << "\n";
    out << "k = " << k << "\n";
    if (!k_list.empty()) {
        out << "k_list = ";
        for (size_t i = 0; i < k_list.size(); ++i) out << (i ? "," : "") << k_list[i];
        out << "\n";
    }
    out << "n = " << n << "\n";
    out << "l = " << l << "\n";
    out << "tau = " << tau << "\n";
    if (epsilon > 0) out << "epsilon = " << epsilon << "\n";
    out << "eta = " << eta << "\n";
    out << "sigma = " << sigma << "\n";
    out << "mode = " << mode_name(mode) << "\n";
    if (union_size > 0) out << "union_size = " << union_size << "\n";
    out << "rounds = " << rounds << "\n";
    out << "rng_seed = " << rng_seed << "\n";
    return out.str();
}

Seed HarnessRng::seed() {
    Seed s;
    for (size_t i = 0; i < kSeedBytes; i += 8) {
        uint64_t v = gen_();
        for (size_t j = 0; j < 8; ++j) s.bytes[i + j] = uint8_t(v >> (8 * j));
    }
    return s;
}

GroupVector HarnessRng::group_vector(GroupParams params) {
    std::vector<u128> elems(params.tau);
    for (auto& e : elems) {
        u128 v = gen_();
        if (params.l == 128) v = v << 64 | gen_();
        e = v & group_mask(params.l);
    }
    return GroupVector(params, std::move(elems));
}

std::vector<uint64_t> HarnessRng::distinct(uint64_t count, uint64_t universe) {
    if (count > universe) fail(Errc::parameter, "cannot sample more than the universe");
    // Floyd's sampling keeps the draw count at `count` regardless of universe.
    std::unordered_set<uint64_t> chosen;
    for (uint64_t j = universe - count; j < universe; ++j) {
        uint64_t t = below(j + 1);
        chosen.insert(chosen.count(t) ? j : t);
    }
    std::vector<uint64_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<GroupVector> plaintext_aggregate(
    const std::vector<GroupVector>& w_prev, const std::vector<std::vector<uint64_t>>& selections,
    const std::vector<std::vector<GroupVector>>& updates) {
    std::vector<GroupVector> out = w_prev;
    for (size_t i = 0; i < selections.size(); ++i)
        for (size_t j = 0; j < selections[i].size(); ++j)
            out[selections[i][j]].add_in_place(updates[i][j]);
    return out;
}

std::string RoundTranscript::messages_csv() const {
    std::string out = "sender,receiver,role,round,header_bytes,payload_bytes\n";
    char line[128];
    for (const auto& msg : messages) {
        std::snprintf(line, sizeof(line), "%s,%s,%u,%llu,%zu,%zu\n", msg.sender.c_str(),
                      msg.receiver.c_str(), unsigned(msg.role),
                      (unsigned long long)msg.round, msg.header_bytes, msg.payload_bytes);
        out += line;
    }
    return out;
}

std::string RoundTranscript::deterministic_text() const {
    std::string out = messages_csv();
    out += "theta=" + std::to_string(theta) + "\n";
    out += "bin_depth=" + std::to_string(bin_depth) + "\n";
    out += "oracle_match=" + std::string(oracle_match ? "true" : "false") + "\n";
    out += "final_w=";
    for (const auto& v : final_w) out += to_hex(v.to_bytes());
    out += "\n";
    return out;
}

std::string RoundTranscript::summary_text() const {
    std::ostringstream out;
    out << "scenario:\n" << scenario.to_text();
    out << "theta = " << theta << "\n";
    out << "bin_depth = " << bin_depth << "\n";
    out << "messages = " << messages.size() << "\n";
    out << "client0_upload_bits_round0 = " << client0_upload_bits_round0 << "\n";
    for (const auto& t : timings) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "round %llu: gen %.2f ms, eval %.2f ms, aggregate %.2f ms\n",
                      (unsigned long long)t.round, t.gen_ms, t.eval_ms, t.agg_ms);
        out << line;
    }
    out << "oracle_match = " << (oracle_match ? "true" : "false") << "\n";
    return out.str();
}

namespace {

struct SimContext {
    Scenario scenario;
    SystemSetup setup;
    GroupParams group;
    std::vector<ClientState> clients;
    RoundTranscript transcript;

    void log(const std::string& sender, const std::string& receiver, Role role, uint64_t round,
             size_t payload_bytes) {
        transcript.messages.push_back(
            {sender, receiver, uint8_t(role), round, kEnvelopeHeaderBytes, payload_bytes});
    }
};

std::string client_name(uint32_t i) { return "C" + std::to_string(i); }

// Shared setup phase: table spec, domain, clients with selections/updates.
SimContext make_context(const Scenario& scenario, HarnessRng& rng, bool with_updates) {
    Scenario::validate(scenario);
    SimContext ctx;
    ctx.scenario = scenario;
    ctx.group = GroupParams{scenario.l, scenario.tau};

    std::vector<uint64_t> domain;
    if (scenario.mode == Mode::union_restricted) {
        domain = rng.distinct(scenario.union_size, scenario.m);
    } else {
        domain.resize(scenario.m);
        for (uint64_t i = 0; i < scenario.m; ++i) domain[i] = i;
    }

    TableSpec spec;
    spec.m = domain.size();
    spec.k = scenario.k;
    spec.epsilon = scenario.effective_epsilon();
    spec.eta = scenario.eta;
    spec.sigma = scenario.sigma;
    spec.hash_seed = rng.seed();
    ctx.setup = make_setup(spec, ctx.group, scenario.mode, scenario.m, std::move(domain),
                           scenario.n);
    ctx.transcript.scenario = scenario;
    ctx.transcript.theta = ctx.setup.simple.theta;
    ctx.transcript.bin_depth = ctx.setup.simple.depth;

    for (uint32_t i = 0; i < scenario.n; ++i) {
        const uint64_t ki = scenario.k_list.empty() ? scenario.k : scenario.k_list[i];
        auto ranks = rng.distinct(ki, ctx.setup.domain.size());
        std::vector<uint64_t> selection(ranks.size());
        for (size_t j = 0; j < ranks.size(); ++j) selection[j] = ctx.setup.domain[ranks[j]];
        std::vector<GroupVector> updates;
        if (with_updates) {
            updates.reserve(selection.size());
            for (size_t j = 0; j < selection.size(); ++j) updates.push_back(rng.group_vector(ctx.group));
        }
        ctx.clients.push_back(make_client(i, std::move(selection), std::move(updates), ctx.setup,
                                          rng.seed(), rng.seed()));
    }
    return ctx;
}

// Client -> both servers plus the S0 -> S1 forward of the public parts.
// Returns both servers' assembled key sets.
std::pair<ServerKeySet, ServerKeySet> deliver_uploads(SimContext& ctx, const ClientState& client,
                                                      const ClientUpload& to_s0,
                                                      const ClientUpload& to_s1, Role role,
                                                      bool psr) {
    const auto payload0 = upload_payload(to_s0, ctx.setup, psr);
    const auto payload1 = upload_payload(to_s1, ctx.setup, psr);
    ctx.log(client_name(client.client_id), "S0", role, to_s0.round, payload0.size());
    ctx.log(client_name(client.client_id), "S1", role, to_s1.round, payload1.size());

    // The forward strips the master seed and re-wraps the public parts.
    const size_t forward_bytes = payload0.size() - kSeedBytes;
    ctx.log("S0", "S1", role, to_s0.round, forward_bytes);

    // Parse back through the wire encoding so the byte format is exercised
    // on every run.
    Envelope env0{role, to_s0.round, client.client_id, payload0};
    auto parsed0 = upload_from_payload(env0, ctx.setup, psr);
    Envelope env1{role, to_s1.round, client.client_id, payload1};
    auto parsed1_msk = upload_from_payload(env1, ctx.setup, psr);
    parsed0.carries_pubs = true;

    ServerKeySet keys0 = server_assemble(0, parsed0, parsed0.msk, ctx.setup, psr);
    ClientUpload for_s1 = parsed0;  // forwarded public parts
    ServerKeySet keys1 = server_assemble(1, for_s1, parsed1_msk.msk, ctx.setup, psr);
    return {std::move(keys0), std::move(keys1)};
}

void exchange_shares(SimContext& ctx, uint64_t round, const std::vector<GroupVector>& share0,
                     const std::vector<GroupVector>& share1) {
    ctx.log("S0", "S1", Role::ssa_share, round, shares_payload(share0).size());
    ctx.log("S1", "S0", Role::ssa_share, round, shares_payload(share1).size());
}

double client0_round0_payload_bits(const RoundTranscript& t) {
    double bits = 0;
    for (const auto& msg : t.messages)
        if (msg.sender == "C0" && msg.round == 0 && (msg.receiver == "S0" || msg.receiver == "S1"))
            bits += double(msg.payload_bytes) * 8;
    return bits;
}

}  // namespace

RoundTranscript run_round(const Scenario& scenario) {
    HarnessRng rng(scenario.rng_seed);
    SimContext ctx = make_context(scenario, rng, /*with_updates=*/true);
    const size_t domain_size = ctx.setup.domain.size();

    std::vector<GroupVector> w_global;
    w_global.reserve(scenario.m);
    for (uint64_t i = 0; i < scenario.m; ++i) w_global.push_back(rng.group_vector(ctx.group));

    const bool updatable = scenario.mode == Mode::udpf_fixed;
    std::vector<ServerKeySet> sessions0, sessions1;
    bool all_match = true;

    for (uint64_t round = 0; round < scenario.rounds; ++round) {
        RoundTiming timing;
        timing.round = round;

        if (round > 0) {
            // Fresh local updates every round.
            for (auto& client : ctx.clients) {
                std::vector<GroupVector> updates;
                updates.reserve(client.selection.size());
                for (size_t j = 0; j < client.selection.size(); ++j)
                    updates.push_back(rng.group_vector(ctx.group));
                if (updatable) {
                    auto t0 = Clock::now();
                    Hint hint = ssa_udpf_round(client, ctx.setup, client.selection, updates, round);
                    timing.gen_ms += ms_since(t0);
                    const auto hint_bytes = hint_serialize(hint);
                    ctx.log(client_name(client.client_id), "S0", Role::ssa_hint, round,
                            hint_bytes.size());
                    ctx.log("S0", "S1", Role::ssa_hint, round, hint_bytes.size());
                    Hint parsed = hint_deserialize(hint_bytes, ctx.group);
                    server_apply_hint(sessions0[client.client_id], parsed, ctx.setup);
                    server_apply_hint(sessions1[client.client_id], parsed, ctx.setup);
                } else {
                    // plain keys must never reuse root seeds across rounds
                    client.updates = std::move(updates);
                    client.msk0 = rng.seed();
                    client.msk1 = rng.seed();
                }
            }
        }

        if (!updatable || round == 0) {
            sessions0.clear();
            sessions1.clear();
            for (auto& client : ctx.clients) {
                auto t0 = Clock::now();
                auto uploads = updatable ? ssa_udpf_upload(client, ctx.setup)
                                         : ssa_client_upload(client, ctx.setup, round);
                timing.gen_ms += ms_since(t0);
                auto [keys0, keys1] = deliver_uploads(ctx, client, uploads.first, uploads.second,
                                                      Role::ssa_u, /*psr=*/false);
                sessions0.push_back(std::move(keys0));
                sessions1.push_back(std::move(keys1));
            }
        }

        AggregateTimings agg0, agg1;
        auto share0 = ssa_server_aggregate(sessions0, ctx.setup, &agg0);
        auto share1 = ssa_server_aggregate(sessions1, ctx.setup, &agg1);
        timing.eval_ms = agg0.eval_ms + agg1.eval_ms;
        timing.agg_ms = agg0.scatter_ms + agg1.scatter_ms;
        exchange_shares(ctx, round, share0, share1);

        std::vector<GroupVector> w_prev_domain;
        w_prev_domain.reserve(domain_size);
        for (size_t r = 0; r < domain_size; ++r) w_prev_domain.push_back(w_global[ctx.setup.domain[r]]);
        auto w_domain = ssa_finalize(share0, share1, w_prev_domain);
        auto w_next = ctx.setup.mode == Mode::union_restricted
                          ? expand_union(ctx.setup, w_domain, w_global)
                          : w_domain;

        std::vector<std::vector<uint64_t>> selections;
        std::vector<std::vector<GroupVector>> updates;
        for (const auto& client : ctx.clients) {
            selections.push_back(client.selection);
            updates.push_back(client.updates);
        }
        auto oracle = plaintext_aggregate(w_global, selections, updates);
        all_match = all_match && (oracle == w_next);

        w_global = std::move(w_next);
        ctx.transcript.timings.push_back(timing);
    }

    ctx.transcript.final_w = std::move(w_global);
    ctx.transcript.oracle_match = all_match;
    ctx.transcript.client0_upload_bits_round0 = client0_round0_payload_bits(ctx.transcript);
    return ctx.transcript;
}

RoundTranscript run_psr(const Scenario& scenario) {
    // Retrieval has no epochs; an updatable-mode scenario runs as basic.
    Scenario psr_scenario = scenario;
    if (psr_scenario.mode == Mode::udpf_fixed) psr_scenario.mode = Mode::full_domain;
    psr_scenario.rounds = 1;
    HarnessRng rng(psr_scenario.rng_seed);
    SimContext ctx = make_context(psr_scenario, rng, /*with_updates=*/false);
    const size_t domain_size = ctx.setup.domain.size();

    std::vector<GroupVector> w_global;
    w_global.reserve(psr_scenario.m);
    for (uint64_t i = 0; i < psr_scenario.m; ++i) w_global.push_back(rng.group_vector(ctx.group));
    std::vector<GroupVector> w_domain;
    w_domain.reserve(domain_size);
    for (size_t r = 0; r < domain_size; ++r) w_domain.push_back(w_global[ctx.setup.domain[r]]);

    RoundTiming timing;
    bool all_match = true;
    for (auto& client : ctx.clients) {
        auto t0 = Clock::now();
        auto uploads = psr_client_query(client, ctx.setup);
        timing.gen_ms += ms_since(t0);
        auto [keys0, keys1] =
            deliver_uploads(ctx, client, uploads.first, uploads.second, Role::psr_q, /*psr=*/true);

        auto t1 = Clock::now();
        auto answer0 = psr_server_answer(keys0, w_domain, ctx.setup);
        auto answer1 = psr_server_answer(keys1, w_domain, ctx.setup);
        timing.eval_ms += ms_since(t1);
        ctx.log("S0", client_name(client.client_id), Role::psr_a, 0,
                shares_payload(answer0).size());
        ctx.log("S1", client_name(client.client_id), Role::psr_a, 0,
                shares_payload(answer1).size());

        auto t2 = Clock::now();
        auto retrieved = psr_client_reconstruct(client, ctx.setup, answer0, answer1);
        timing.agg_ms += ms_since(t2);

        if (retrieved.size() != client.selection.size()) all_match = false;
        for (uint64_t element : client.selection) {
            auto it = retrieved.find(element);
            if (it == retrieved.end() || !(it->second == w_global[element])) all_match = false;
        }
    }

    ctx.transcript.timings.push_back(timing);
    ctx.transcript.final_w = std::move(w_global);
    ctx.transcript.oracle_match = all_match;
    ctx.transcript.client0_upload_bits_round0 = client0_round0_payload_bits(ctx.transcript);
    return ctx.transcript;
}

std::string bench_sweep(const std::vector<Scenario>& grid) {
    std::string out =
        "m,k,c,tau,sigma,mode,round,client_upload_bytes,gen_ms,eval_ms,agg_ms,oracle_match\n";
    for (const auto& scenario : grid) {
        RoundTranscript t = run_round(scenario);
        for (const auto& timing : t.timings) {
            double upload_bytes = 0;
            for (const auto& msg : t.messages)
                if (msg.sender == "C0" && msg.round == timing.round &&
                    (msg.receiver == "S0" || msg.receiver == "S1"))
                    upload_bytes += double(msg.payload_bytes);
            char line[256];
            std::snprintf(line, sizeof(line), "%llu,%llu,%.6f,%u,%u,%s,%llu,%.0f,%.2f,%.2f,%.2f,%s\n",
                          (unsigned long long)scenario.m, (unsigned long long)scenario.k,
                          double(scenario.k) / double(scenario.m), scenario.tau, scenario.sigma,
                          mode_name(scenario.mode).c_str(), (unsigned long long)timing.round,
                          upload_bytes, timing.gen_ms, timing.eval_ms, timing.agg_ms,
                          t.oracle_match ? "true" : "false");
            out += line;
        }
    }
    return out;
}

}  // namespace fsl
