#include "fsl/analytics.hpp"

#include <cmath>
#include <cstdio>

namespace fsl {

void CostModel::validate(const CostModel& model) {
    if (model.lambda <= 0 || model.l <= 0 || model.tau < 1 || model.epsilon <= 1 ||
        model.depth < 1 || model.m <= 0 || model.k < 0 || model.sigma < 0)
        fail(Errc::parameter, "cost model fields must be positive");
    if (model.k > model.m) fail(Errc::parameter, "k must not exceed m");
}

double basic_upload_bits(const CostModel& model) {
    CostModel::validate(model);
    if (model.sigma != 0) fail(Errc::unsupported, "no closed form with a stash");
    return model.epsilon * model.k * (model.depth * (model.lambda + 2) + model.tau * model.l) +
           model.lambda;
}

double psr_upload_bits(const CostModel& model) {
    CostModel psr = model;
    psr.tau = 1;
    return basic_upload_bits(psr);
}

double trivial_upload_bits(const CostModel& model) {
    return model.m * model.tau * model.l + model.lambda;
}

double rate_coefficient(const CostModel& model) {
    const double big_l = model.tau * model.l;
    return model.epsilon * (model.depth * (model.lambda + 2) + big_l) / big_l;
}

RateReport rate_basic(const CostModel& model) {
    RateReport report;
    report.upload_bits = basic_upload_bits(model);
    report.trivial_bits = trivial_upload_bits(model);
    report.rate = report.upload_bits / report.trivial_bits;
    // The lambda terms cancel at the break-even point, so the threshold is
    // exactly the inverse coefficient.
    report.threshold_c = 1.0 / rate_coefficient(model);
    return report;
}

RateReport rate_mega(const CostModel& model) { return rate_basic(model); }

UdpfRateReport rate_udpf(const CostModel& model, uint64_t round) {
    CostModel::validate(model);
    if (round == 0) {
        RateReport first = rate_basic(model);
        return {first, first};
    }
    const double big_l = model.tau * model.l;
    UdpfRateReport report;
    report.nominal.upload_bits = model.k * big_l;
    report.nominal.trivial_bits = model.m * big_l;
    report.nominal.rate = model.k / model.m;
    report.nominal.threshold_c = 1.0;
    report.implemented.upload_bits = std::ceil(model.epsilon * model.k - 1e-9) * big_l;
    report.implemented.trivial_bits = model.m * big_l;
    report.implemented.rate = report.implemented.upload_bits / report.implemented.trivial_bits;
    report.implemented.threshold_c = 1.0 / model.epsilon;
    return report;
}

ReconcileReport reconcile(const CostModel& model, double measured_client_upload_bits, bool psr) {
    ReconcileReport report;
    report.measured_bits = measured_client_upload_bits;
    report.formula_bits = psr ? psr_upload_bits(model) : basic_upload_bits(model);
    report.deviation =
        std::fabs(report.measured_bits - report.formula_bits) / report.formula_bits;
    report.pass = report.deviation < 0.01;
    return report;
}

RateTableRow rate_row(const CostModel& model) {
    RateReport r = rate_basic(model);
    return RateTableRow{model.m,       model.k,        model.c(), model.depth, model.tau,
                        r.upload_bits, r.trivial_bits, r.rate,    r.threshold_c};
}

std::string rate_table_csv(const std::vector<RateTableRow>& rows) {
    std::string out = "m,k,c,depth,tau,upload_bits,trivial_bits,rate,threshold_c\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%.0f,%.0f,%.6f,%.0f,%.0f,%.1f,%.1f,%.6f,%.6f\n", r.m,
                      r.k, r.c, r.depth, r.tau, r.upload_bits, r.trivial_bits, r.rate,
                      r.threshold_c);
        out += line;
    }
    return out;
}

}  // namespace fsl
