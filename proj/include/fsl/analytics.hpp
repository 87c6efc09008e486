#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsl/common.hpp"

namespace fsl {

// Closed-form communication accounting. Counts are logical elements: one
// element carries L = tau*l bits, a client selects k of m, and the
// compression rate is c = k/m.
struct CostModel {
    double lambda = 128;
    double l = 128;
    double tau = 1;
    double epsilon = 1.25;
    double depth = 9;  // ceil(log2 theta)
    double m = 0;
    double k = 0;
    double sigma = 0;

    double c() const { return k / m; }

    static void validate(const CostModel& model);
};

struct RateReport {
    double upload_bits = 0;
    double trivial_bits = 0;  // m*tau*l + lambda
    double rate = 0;          // upload_bits / trivial_bits
    double threshold_c = 0;   // largest c with rate <= 1
};

// Per-client upload of the basic stash-less protocol:
// epsilon*k*(depth*(lambda+2) + tau*l) + lambda bits.
double basic_upload_bits(const CostModel& model);

// PSR variant: the final correction word carries a scalar, not a mega-element.
double psr_upload_bits(const CostModel& model);

double trivial_upload_bits(const CostModel& model);

// rate ~= coefficient * c with coefficient = epsilon*(depth*(lambda+2)+L)/L.
double rate_coefficient(const CostModel& model);

RateReport rate_basic(const CostModel& model);
RateReport rate_mega(const CostModel& model);  // same closed form, tau-aware

struct UdpfRateReport {
    RateReport nominal;      // k*L-bit hints, the headline update-round figure
    RateReport implemented;  // ceil(epsilon*k) hints: every bin is refreshed
};
UdpfRateReport rate_udpf(const CostModel& model, uint64_t round);

struct MessageRecord;  // defined in harness.hpp

struct ReconcileReport {
    double measured_bits = 0;  // client->server payload bits, headers excluded
    double formula_bits = 0;
    double deviation = 0;  // |measured - formula| / formula
    bool pass = false;     // deviation < 1%
};

// Compares a transcript's measured per-client upload against the closed
// form. Only stash-less models have a closed form; sigma > 0 raises
// Errc::unsupported (callers still have the measured figure).
ReconcileReport reconcile(const CostModel& model, double measured_client_upload_bits, bool psr);

struct RateTableRow {
    double m, k, c, depth, tau, upload_bits, trivial_bits, rate, threshold_c;
};
std::string rate_table_csv(const std::vector<RateTableRow>& rows);
RateTableRow rate_row(const CostModel& model);

}  // namespace fsl
